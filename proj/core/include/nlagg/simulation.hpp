#pragma once

// Coupled AGG time loop: Cahn-Hilliard step with the current velocity, then
// the momentum step with the fresh phase field and chemical potential.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlagg/kernel.hpp"
#include "nlagg/nch.hpp"
#include "nlagg/ns.hpp"
#include "nlagg/potential.hpp"

namespace nlagg {

enum class InitialPreset { Bubble, RandomMix, Stratified };

struct InitialCondition {
  InitialPreset preset = InitialPreset::Bubble;
  /// max |phi_0| after scaling.
  double amplitude = 0.9;
  /// Bubble: centre and radius. Stratified: interface height `cy`.
  double cx = 0.5;
  double cy = 0.5;
  double radius = 0.25;
  /// tanh transition width.
  double width = 0.05;
  /// RandomMix: mean value, seed and highest cosine mode.
  double mean = 0.0;
  std::uint64_t seed = 1;
  int modes = 6;
};

struct OutputCadence {
  /// Steps between field snapshots / checkpoints; 0 disables.
  long snapshot_every = 0;
  long checkpoint_every = 0;
};

struct SimConfig {
  Domain domain = Domain::make(64, 64);
  FluidParams fluid;
  PotentialSpec potential;
  KernelConfig kernel;
  double lambda = 1e-4;
  double dt = 1e-3;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max = 50;
  Advection advection = Advection::Upwind;
  /// Keep the rho'(grad mu . grad) u momentum term (off gives Model H).
  bool include_flux = true;
  InitialCondition initial;
  OutputCadence output;

  /// InvalidArgument on inconsistent values.
  void validate() const;
  long steps() const;
};

struct SimState {
  NsState ns;
  ChState ch;
  long step = 0;
};

struct EnergyRecord {
  double t = 0.0;
  double e_total = 0.0;
  double e_kin = 0.0;
  double e_nloc = 0.0;
  double dissipation = 0.0;
  double grad_mu_sq = 0.0;
  double residual = 0.0;  // r_{n-1}; zero for the first record
  double mass = 0.0;
  double sep_margin = 0.0;
  double u_l2 = 0.0;
};

struct EnergyLedger {
  double dt = 0.0;
  std::vector<EnergyRecord> records;

  void write_csv(const std::filesystem::path& path) const;
  static EnergyLedger read_csv(const std::filesystem::path& path, double dt);
};

/// r_n = E^{n+1} - E^n + dt (dissipation^{n+1} + ||grad mu^{n+1}||^2).
double energy_identity_residual(const EnergyLedger& ledger, std::size_t n);

/// |mean phi(T) - mean phi(0)| / |mean phi(0)| (absolute when the mean is 0).
double relative_mass_drift(const EnergyLedger& ledger);

/// Number of steps with E^{n+1} > E^n + |r_n|.
long energy_violations(const EnergyLedger& ledger);

/// Smallest separation margin over the ledger.
double min_separation_margin(const EnergyLedger& ledger);

ScalarField initial_phase(const Domain& d, const InitialCondition& ic);

class Simulator {
public:
  explicit Simulator(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const KernelSpec& kernel() const { return kernel_; }
  const YosidaParams& yosida() const { return yosida_; }
  ChStepParams ch_params() const;

  /// u = 0, p = 0, phi from the preset, mu = F'(phi) - J * phi.
  SimState initial_state() const;
  SimState state_from(const ScalarField& phi, const VectorField& u) const;

  /// One coupled step. Sub-solver failures surface as StepError.
  SimState step(const SimState& s) const;

  double total_energy(const SimState& s) const;
  EnergyRecord record(const SimState& s) const;

private:
  SimConfig cfg_;
  KernelSpec kernel_;
  YosidaParams yosida_;
};

double total_energy(const SimState& s, const Simulator& sim);

struct RunOptions {
  /// Output directory for ledger.csv, snapshots/ and checkpoints/; empty runs in memory.
  std::filesystem::path out_dir;
  /// Called after every step with the new state and its record.
  std::function<void(const SimState&, const EnergyRecord&)> observer;
  /// Continue from this state (e.g. a checkpoint) instead of the initial one.
  std::optional<SimState> start;
  /// Ledger records preceding `start` (restart bookkeeping).
  std::vector<EnergyRecord> prior_records;
};

struct RunResult {
  SimState final_state;
  EnergyLedger ledger;
  std::vector<std::filesystem::path> outputs;
};

/// Steps to t_end. On a StepError the ledger so far is flushed before rethrowing.
RunResult run(const Simulator& sim, const RunOptions& opt = {});

}  // namespace nlagg
