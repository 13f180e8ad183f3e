#include "nlagg/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "nlagg/checkpoint.hpp"
#include "nlagg/field_io.hpp"

namespace nlagg {

namespace fs = std::filesystem;

void SimConfig::validate() const {
  fluid.validate();
  NLAGG_REQUIRE(potential.alpha > 0.0, ErrorKind::InvalidArgument, "alpha must be positive");
  NLAGG_REQUIRE(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
  NLAGG_REQUIRE(t_end == 0.0 || t_end >= dt * (1.0 - 1e-12), ErrorKind::InvalidArgument,
                "t_end must be zero or at least dt");
  NLAGG_REQUIRE(lambda > 0.0, ErrorKind::InvalidArgument, "lambda must be positive");
  NLAGG_REQUIRE(newton_tol > 0.0 && newton_max > 0, ErrorKind::InvalidArgument, "bad Newton settings");
  NLAGG_REQUIRE(initial.amplitude > 0.0 && initial.amplitude <= 0.95, ErrorKind::InvalidArgument,
                "initial amplitude must lie in (0, 0.95] (separated initial datum)");
  NLAGG_REQUIRE(initial.width > 0.0 && initial.modes >= 1, ErrorKind::InvalidArgument,
                "initial width and modes must be positive");
  NLAGG_REQUIRE(std::abs(initial.mean) < initial.amplitude, ErrorKind::InvalidArgument,
                "random-mix mean must be smaller than the amplitude");
  NLAGG_REQUIRE(output.snapshot_every >= 0 && output.checkpoint_every >= 0, ErrorKind::InvalidArgument,
                "output cadences must be non-negative");
}

long SimConfig::steps() const { return std::lround(t_end / dt); }

// ----------------------------------------------------------------- ledger

void EnergyLedger::write_csv(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string());
  out << "t,E_total,E_kin,E_nloc,dissipation,grad_mu_sq,residual,mass,sep_margin,u_l2\n";
  char buf[512];
  for (const EnergyRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t,
                  r.e_total, r.e_kin, r.e_nloc, r.dissipation, r.grad_mu_sq, r.residual, r.mass,
                  r.sep_margin, r.u_l2);
    out << buf;
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

EnergyLedger EnergyLedger::read_csv(const fs::path& path, double dt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  EnergyLedger ledger;
  ledger.dt = dt;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EnergyRecord r;
    double* fields[] = {&r.t, &r.e_total, &r.e_kin, &r.e_nloc, &r.dissipation,
                        &r.grad_mu_sq, &r.residual, &r.mass, &r.sep_margin, &r.u_l2};
    std::istringstream ss(line);
    std::string cell;
    for (double* f : fields) {
      if (!std::getline(ss, cell, ',')) throw Error(ErrorKind::InvalidValue, "short ledger row: " + line);
      *f = std::strtod(cell.c_str(), nullptr);
    }
    ledger.records.push_back(r);
  }
  return ledger;
}

double energy_identity_residual(const EnergyLedger& ledger, std::size_t n) {
  NLAGG_REQUIRE(n + 1 < ledger.records.size(), ErrorKind::InvalidArgument, "ledger index out of range");
  const EnergyRecord& a = ledger.records[n];
  const EnergyRecord& b = ledger.records[n + 1];
  return b.e_total - a.e_total + ledger.dt * (b.dissipation + b.grad_mu_sq);
}

double relative_mass_drift(const EnergyLedger& ledger) {
  NLAGG_REQUIRE(!ledger.records.empty(), ErrorKind::InvalidArgument, "empty ledger");
  const double m0 = ledger.records.front().mass;
  const double d = std::abs(ledger.records.back().mass - m0);
  return m0 != 0.0 ? d / std::abs(m0) : d;
}

long energy_violations(const EnergyLedger& ledger) {
  long bad = 0;
  for (std::size_t n = 1; n < ledger.records.size(); ++n) {
    const EnergyRecord& a = ledger.records[n - 1];
    const EnergyRecord& b = ledger.records[n];
    if (b.e_total > a.e_total + std::abs(b.residual)) ++bad;
  }
  return bad;
}

double min_separation_margin(const EnergyLedger& ledger) {
  double m = 1.0;
  for (const EnergyRecord& r : ledger.records) m = std::min(m, r.sep_margin);
  return m;
}

// ----------------------------------------------------------- initial data

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

ScalarField scaled(ScalarField g, double amplitude) {
  const double m = g.max_abs();
  NLAGG_REQUIRE(m > 0.0, ErrorKind::InvalidArgument, "initial profile vanishes on the grid");
  g *= amplitude / m;
  for (double& v : g.values()) v = std::clamp(v, -amplitude, amplitude);
  return g;
}

}  // namespace

ScalarField initial_phase(const Domain& d, const InitialCondition& ic) {
  switch (ic.preset) {
    case InitialPreset::Bubble:
      return scaled(ScalarField::sample(d,
                                        [&](double x, double y) {
                                          const double r = std::hypot(x - ic.cx, y - ic.cy);
                                          return std::tanh((ic.radius - r) / ic.width);
                                        }),
                    ic.amplitude);
    case InitialPreset::Stratified:
      return scaled(ScalarField::sample(d, [&](double, double y) { return std::tanh((y - ic.cy) / ic.width); }),
                    ic.amplitude);
    case InitialPreset::RandomMix: {
      std::mt19937_64 rng(ic.seed);
      ScalarField g(d);
      for (int ky = 0; ky <= ic.modes; ++ky)
        for (int kx = 0; kx <= ic.modes; ++kx) {
          const double a = (2.0 * unit_uniform(rng) - 1.0) / (1.0 + kx * kx + ky * ky);
          if (kx == 0 && ky == 0) continue;
          for (int j = 0; j < d.ny; ++j)
            for (int i = 0; i < d.nx; ++i)
              g(i, j) += a * std::cos(kx * std::numbers::pi * d.xc(i) / d.lx) *
                         std::cos(ky * std::numbers::pi * d.yc(j) / d.ly);
        }
      remove_mean(g);
      ScalarField phi = scaled(std::move(g), ic.amplitude - std::abs(ic.mean));
      for (double& v : phi.values()) v += ic.mean;
      return phi;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown initial preset");
}

// -------------------------------------------------------------- simulator

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  kernel_ = KernelSpec::make(cfg_.kernel, cfg_.domain);
  yosida_ = YosidaParams::make(cfg_.lambda, kernel_w11_norm(kernel_));
}

ChStepParams Simulator::ch_params() const {
  ChStepParams p;
  p.dt = cfg_.dt;
  p.yosida = yosida_;
  p.newton_tol = cfg_.newton_tol;
  p.newton_max = cfg_.newton_max;
  p.advection = cfg_.advection;
  return p;
}

SimState Simulator::state_from(const ScalarField& phi, const VectorField& u) const {
  NLAGG_REQUIRE(phi.domain() == cfg_.domain && u.domain() == cfg_.domain, ErrorKind::InvalidArgument,
                "initial fields live on a different grid");
  SimState s;
  s.ch.phi = phi;
  s.ch.mu = chemical_potential(phi, kernel_, cfg_.potential);
  s.ns.u = u;
  s.ns.u.enforce_no_slip();
  s.ns.p = PressureField{ScalarField(cfg_.domain), true};
  return s;
}

SimState Simulator::initial_state() const {
  return state_from(initial_phase(cfg_.domain, cfg_.initial), VectorField(cfg_.domain));
}

SimState Simulator::step(const SimState& s) const {
  const long next = s.step + 1;
  try {
    SimState n;
    n.ch = ch_step(s.ch, s.ns.u, ch_params(), kernel_, cfg_.potential);
    NsStepOptions opt;
    opt.include_flux = cfg_.include_flux;
    n.ns = ns_step(s.ns, s.ch.phi, n.ch.phi, n.ch.mu, cfg_.fluid, cfg_.dt, opt);
    n.step = next;
    n.ch.t = n.ns.t = static_cast<double>(next) * cfg_.dt;
    return n;
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(e, next);
  }
}

double Simulator::total_energy(const SimState& s) const {
  return kinetic_energy(s.ns.u, density(s.ch.phi, cfg_.fluid)) + ch_energy(s.ch.phi, kernel_, cfg_.potential);
}

EnergyRecord Simulator::record(const SimState& s) const {
  EnergyRecord r;
  r.t = s.ch.t;
  r.e_kin = kinetic_energy(s.ns.u, density(s.ch.phi, cfg_.fluid));
  r.e_nloc = ch_energy(s.ch.phi, kernel_, cfg_.potential);
  r.e_total = r.e_kin + r.e_nloc;
  r.dissipation = viscous_dissipation(s.ns.u, viscosity(s.ch.phi, cfg_.fluid));
  const double g = norm_grad(s.ch.mu);
  r.grad_mu_sq = g * g;
  r.mass = s.ch.phi.mean();
  r.sep_margin = separation_margin(s.ch.phi);
  r.u_l2 = norm_l2_vec(s.ns.u);
  return r;
}

double total_energy(const SimState& s, const Simulator& sim) { return sim.total_energy(s); }

// --------------------------------------------------------------------- run

namespace {

std::string numbered(const char* stem, long step, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%08ld%s", stem, step, ext);
  return buf;
}

}  // namespace

RunResult run(const Simulator& sim, const RunOptions& opt) {
  const SimConfig& cfg = sim.config();
  RunResult res;
  res.ledger.dt = cfg.dt;
  res.ledger.records = opt.prior_records;
  SimState s = opt.start ? *opt.start : sim.initial_state();
  const bool to_disk = !opt.out_dir.empty();

  auto snapshot = [&](const SimState& st) {
    if (!to_disk) return;
    if (cfg.output.snapshot_every > 0 && st.step % cfg.output.snapshot_every == 0) {
      const fs::path dir = opt.out_dir / "snapshots";
      fs::create_directories(dir);
      const fs::path phi = dir / numbered("phi", st.step, ".fld");
      const fs::path u = dir / numbered("u", st.step, ".fld");
      write_field(phi, st.ch.phi);
      write_field(u, st.ns.u);
      res.outputs.push_back(phi);
      res.outputs.push_back(u);
    }
    if (cfg.output.checkpoint_every > 0 && st.step % cfg.output.checkpoint_every == 0) {
      const fs::path dir = opt.out_dir / "checkpoints" / numbered("step", st.step, "");
      write_checkpoint(st, dir);
      res.outputs.push_back(dir);
    }
  };
  auto flush_ledger = [&] {
    if (!to_disk) return;
    const fs::path path = opt.out_dir / "ledger.csv";
    res.ledger.write_csv(path);
    res.outputs.push_back(path);
  };

  if (to_disk) fs::create_directories(opt.out_dir);
  try {
    if (res.ledger.records.empty()) {
      res.ledger.records.push_back(sim.record(s));
      snapshot(s);
    }
    const long steps = cfg.steps();
    while (s.step < steps) {
      SimState next = sim.step(s);
      EnergyRecord rec;
      try {
        rec = sim.record(next);
      } catch (const Error& e) {
        throw StepError(e, next.step);
      }
      const EnergyRecord& prev = res.ledger.records.back();
      rec.residual = rec.e_total - prev.e_total + cfg.dt * (rec.dissipation + rec.grad_mu_sq);
      res.ledger.records.push_back(rec);
      s = std::move(next);
      if (opt.observer) opt.observer(s, rec);
      snapshot(s);
    }
  } catch (const Error&) {
    flush_ledger();
    throw;
  }
  flush_ledger();
  res.final_state = std::move(s);
  return res;
}

}  // namespace nlagg
