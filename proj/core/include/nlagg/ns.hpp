#pragma once

// Variable-density momentum equation in non-conservative form
//   rho u_t + rho (u . grad) u - rho' (grad mu . grad) u - div(nu D u) + grad p = mu grad phi
// with rho(phi) = rho1 (1+phi)/2 + rho2 (1-phi)/2 and rho' = (rho1 - rho2)/2.
// Time stepping is an incremental pressure correction on the MAC grid.

#include "nlagg/grid.hpp"
#include "nlagg/inverse_ops.hpp"

namespace nlagg {

struct FluidParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double nu1 = 0.1;
  double nu2 = 0.1;

  /// InvalidArgument unless every entry is positive and finite.
  void validate() const;
  double rho_prime() const { return 0.5 * (rho1 - rho2); }
};

struct NsState {
  VectorField u;
  PressureField p;
  double t = 0.0;
};

struct NsStepOptions {
  /// Keep the rho'(grad mu . grad) u term. It is skipped anyway when rho1 == rho2.
  bool include_flux = true;
  SolveOptions linear;
};

struct NsStepStats {
  int viscous_iterations = 0;
  int pressure_iterations = 0;
};

/// Pointwise affine blends of the clamped phase field.
ScalarField density(const ScalarField& phi, const FluidParams& fp);
ScalarField viscosity(const ScalarField& phi, const FluidParams& fp);

/// Arithmetic face averages of a cell field (wall faces copy the adjacent cell).
VectorField face_average(const ScalarField& f);

/// -div(nu D v) as the gradient of 1/2 int nu |Dv|^2 (Dv from strain_rate()).
VectorField apply_viscous(const VectorField& v, const ScalarField& nu);

/// Explicit rho (u . grad) u on the faces.
VectorField convection(const VectorField& u, const ScalarField& rho);

/// Explicit (grad mu . grad) u on the faces.
VectorField flux_transport(const VectorField& u, const ScalarField& mu);

/// mu_f grad phi on the faces.
VectorField capillary_force(const ScalarField& mu, const ScalarField& phi);

/// Advances (u, p) from t to t + dt. phi_old / phi are the phase fields at
/// t and t + dt, mu the chemical potential at t + dt.
NsState ns_step(const NsState& ns, const ScalarField& phi_old, const ScalarField& phi,
                const ScalarField& mu, const FluidParams& fp, double dt, const NsStepOptions& opt = {},
                NsStepStats* stats = nullptr);

/// 1/2 sum_f rho_f u_f^2 h^2.
double kinetic_energy(const VectorField& u, const ScalarField& rho);
/// int nu |Du|^2.
double viscous_dissipation(const VectorField& u, const ScalarField& nu);

/// ||div u||_inf * min(h) / ||u||_inf (0 for u = 0).
double relative_divergence(const VectorField& u);

/// ||P||_{L4} / (||grad A^{-1} f||^{1/2} ||f||^{1/2}) for the Stokes pair of f.
/// ZeroInput for f = 0.
double pressure_l4_ratio(const Domain& d, const VectorField& f, const SolveOptions& opt = {});

}  // namespace nlagg
