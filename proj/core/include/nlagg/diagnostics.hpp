#pragma once

// Experiments behind the quantitative claims: continuous dependence with a
// Gronwall envelope, AGG against Model H, the L4 pressure interpolation,
// restart uniqueness and the Yosida property suite.
//
// Every report stores its raw series; audit() recomputes the pass flag from
// those series alone.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nlagg/simulation.hpp"

namespace nlagg {

/// Worker cap for independent runs inside an experiment (default 1).
void set_thread_cap(int n);
int thread_cap();

struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& c) const;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<Series> series;
  /// Fitted slopes, constants and thresholds the criterion refers to.
  std::map<std::string, double> fitted;
  std::string criterion;
  bool pass = false;

  const Series& find(const std::string& series_name) const;
  /// Pass flag recomputed from `series` and the thresholds in `fitted`.
  bool audit() const;
  std::string summary() const;
  /// One CSV per series plus summary.txt.
  void write(const std::filesystem::path& dir) const;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------- dependence

/// K(t) = 1 + ||d_t u||^2 + ||grad u||_{L4}^4 + ||u||_{H2}^2 + ||grad phi||_{L4}^4
/// (the constant C set to 1). d_t u by second-order differences of the
/// stored velocities (one-sided at the ends).
struct GronwallSeries {
  std::vector<double> t;
  std::vector<double> k;
  std::vector<double> integral;  // trapezoidal int_0^t K
};

GronwallSeries gronwall_factor(const std::vector<SimState>& traj, double dt);

/// Pieces of K at a single state (exposed for tests).
double grad_l4_fourth(const VectorField& u);
double grad_l4_fourth(const ScalarField& phi);
/// ||u||^2 + ||grad u||^2 + ||Delta_h u||^2.
double h2_norm_sq(const VectorField& u);

/// D = ||u1 - u2||^2 + ||phi1 - phi2||^2.
double state_distance_sq(const SimState& a, const SimState& b);

/// Mean-preserving perturbation delta cos(pi x / lx) cos(pi y / ly).
ScalarField dependence_perturbation(const Domain& d, double delta);

/// Base trajectory against phi_0 + dependence_perturbation(delta) for each
/// delta. Passes if log D(t) <= log D(0) + int_0^t K + log 10 at every step
/// and D(T)/D(0) agrees across the positive deltas within a factor 2.
ExperimentReport run_continuous_dependence(const SimConfig& cfg, const std::vector<double>& deltas);

// ----------------------------------------------------------------- stability

struct StabilityOptions {
  /// Output times for the sup are every `sample_every` steps (and the last).
  long sample_every = 10;
  double slope_lo = 0.8;
  double slope_hi = 1.2;
};

/// rho1 = rho_bar, rho2 = rho_bar + eps with the flux term against Model H
/// (rho_bar, no flux), same initial data. e(eps) = sup_t ||u - u_H||_sharp +
/// ||phi - phi_H - mean||_*. Needs at least three positive eps for the fit.
ExperimentReport run_stability_experiment(const SimConfig& cfg, double rho_bar, const std::vector<double>& eps_list,
                                          const StabilityOptions& opt = {});

// ------------------------------------------------------------------ pressure

/// Smooth random forcing from a seed, sampled on the faces of d and Leray
/// projected. The same seed gives the same continuous field on every grid.
VectorField random_divergence_free_forcing(const Domain& d, std::uint64_t seed, int modes = 4);

/// pressure_l4_ratio for n_samples seeded forcings on each grid. Passes when
/// every ratio is finite, max ratios grow at most 2x per refinement and each
/// ratio is invariant under scaling f -> 2.5 f to 1e-8.
ExperimentReport run_pressure_interpolation_study(const std::vector<int>& grids, int n_samples,
                                                  std::uint64_t seed = 1);

// ---------------------------------------------------------------- uniqueness

/// Runs cfg to t_end, restarts from checkpoints written at step 0 and at
/// steps()/2 (through the on-disk format in `scratch`) and compares every
/// later state bitwise.
ExperimentReport run_separated_uniqueness_check(const SimConfig& cfg, const std::filesystem::path& scratch);

// -------------------------------------------------------------------- yosida

/// F_l(0) = F'_l(0) = 0; coercivity with a fitted constant;
/// finite-difference F''_l >= alpha/(1+alpha) - 1e-6 on 1000 points;
/// Lipschitz constant 1/l on 100 random pairs; |F'_l(+-1.5)| increasing as
/// l decreases; F_l increasing to F at 50 interior points; resolvent contraction.
ExperimentReport run_yosida_suite(const PotentialSpec& p, const std::vector<double>& lambdas,
                                  double kernel_w11 = 0.0, std::uint64_t seed = 7);

// -------------------------------------------------------------- trajectories

/// L2 norm of (rho^{n+1} - rho^n)/dt + div(rho_f^n u^n) - rho' Delta_h mu^{n+1}, the
/// discrete continuity equation with the lagged velocity and the face
/// interpolation (`scheme`) the phase step uses.
double continuity_residual(const SimState& prev, const SimState& next, const FluidParams& fp, double dt,
                           Advection scheme = Advection::Upwind);

/// Both sides of the rearrangement (div u = 0, u . n = 0)
///   int (u.grad phi) d_t mu = int (u.grad mu) d_t phi + int (u.(grad J * phi)) d_t phi
///                             + int (u.grad(J * d_t phi)) phi
/// between two stored states, with time-midpoint fields, the lagged velocity
/// and cell-centred differences. The sides agree up to discretisation error.
struct DriftIdentity {
  double lhs = 0.0;
  double transport = 0.0;
  double kernel_force = 0.0;
  double kernel_rate = 0.0;

  double rhs() const { return transport + kernel_force + kernel_rate; }
};

DriftIdentity drift_identity(const SimState& prev, const SimState& next, const KernelSpec& k, double dt);

}  // namespace nlagg
