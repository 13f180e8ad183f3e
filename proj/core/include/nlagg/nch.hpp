#pragma once

// Nonlocal convective Cahn-Hilliard with constant mobility:
//   phi_t + u . grad phi = Delta mu,   mu = F'(phi) - J * phi,   d_n mu = 0.
// Convex splitting in time: F'_lambda implicit, the nonlocal part explicit.

#include "nlagg/grid.hpp"
#include "nlagg/inverse_ops.hpp"
#include "nlagg/kernel.hpp"
#include "nlagg/potential.hpp"

namespace nlagg {

enum class Advection { Upwind, Centered };

struct ChState {
  ScalarField phi;
  ScalarField mu;
  double t = 0.0;
};

struct ChStepParams {
  double dt = 1e-3;
  YosidaParams yosida;
  double newton_tol = 1e-10;
  int newton_max = 50;
  Advection advection = Advection::Upwind;
  SolveOptions linear;
};

struct ChStepStats {
  int newton_iterations = 0;
  int cg_iterations = 0;
  double final_residual = 0.0;
};

/// F'(phi) - J * phi. OutOfDomain if any |phi| >= 1.
ScalarField chemical_potential(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p);

/// F'_lambda(phi) - J * phi; defined for every real phi.
ScalarField regularized_chemical_potential(const ScalarField& phi, const KernelSpec& k,
                                           const PotentialSpec& p, const YosidaParams& yp);

/// Face values u_f * phi_f of the advective flux (zero on the walls).
VectorField advective_flux(const VectorField& u, const ScalarField& phi, Advection scheme);

/// One step. Throws CflViolation when ||u||_inf dt / min(hx, hy) > 1 and
/// NewtonDivergence when the nonlinear solve fails.
ChState ch_step(const ChState& s, const VectorField& u, const ChStepParams& prm, const KernelSpec& k,
                const PotentialSpec& p, ChStepStats* stats = nullptr);

/// sum F(phi) h^2 - 1/2 sum (J * phi) phi h^2. OutOfDomain for |phi| > 1.
double ch_energy(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p);

/// ||mu - mean(mu)||_{L2} with mu = F'(phi) - J * phi.
double stationary_residual(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p);

/// 1 - max |phi|.
double separation_margin(const ScalarField& phi);

/// Throws CflViolation if the advective Courant number exceeds one.
void check_cfl(const VectorField& u, double dt);

}  // namespace nlagg
