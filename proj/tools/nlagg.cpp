// nlagg: batch front end for the simulator and the verification experiments.
//
// Exit codes: 0 all criteria met, 1 solver, input or I/O error, 2 criteria failed.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlagg/checkpoint.hpp"
#include "nlagg/config.hpp"
#include "nlagg/diagnostics.hpp"
#include "nlagg/field_io.hpp"
#include "nlagg/manifest.hpp"
#include "nlagg/version.hpp"

namespace fs = std::filesystem;
using namespace nlagg;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCriteriaFailed = 2;

struct Common {
  std::string config;
  std::string out;
  int grid = 0;
  std::optional<std::uint64_t> seed;
};

SimConfig load(const Common& c) {
  SimConfig cfg = parse_config(c.config);
  if (c.grid > 0) cfg.domain = Domain::make(c.grid, c.grid, cfg.domain.lx, cfg.domain.ly);
  if (c.seed) cfg.initial.seed = *c.seed;
  cfg.validate();
  return cfg;
}

// Owns the output directory for one command: lock, stored config, manifest.
class Session {
public:
  Session(const fs::path& out, std::string command) : out_(out), lock_(out) {
    manifest_.command = std::move(command);
    manifest_.version = std::string(kVersion);
    manifest_.start_time = utc_timestamp();
  }

  void store_config(const SimConfig& cfg) {
    const fs::path path = out_ / "config.toml";
    std::ofstream(path, std::ios::binary) << format_config(cfg);
    manifest_.config_hash = sha256_file(path);
    add("config.toml");
  }

  void add(const fs::path& p) {
    std::string rel = p.is_absolute() ? fs::relative(p, out_).string() : p.string();
    if (std::find(manifest_.outputs.begin(), manifest_.outputs.end(), rel) == manifest_.outputs.end())
      manifest_.outputs.push_back(std::move(rel));
  }

  int finish(int status, const std::string& message) {
    manifest_.end_time = utc_timestamp();
    manifest_.exit_status = status;
    manifest_.message = message;
    manifest_.write(out_);
    return status;
  }

  const fs::path& out() const { return out_; }

private:
  fs::path out_;
  DirectoryLock lock_;
  RunManifest manifest_;
};

// Errors after the lock is taken still leave a manifest behind.
template <class Fn>
int in_session(const fs::path& out, const std::string& command, Fn&& body) {
  Session s(out, command);
  try {
    return body(s);
  } catch (const Error& e) {
    std::cerr << "nlagg: " << e.what() << '\n';
    return s.finish(kError, e.what());
  }
}

int report_result(Session& s, const ExperimentReport& r) {
  r.write(s.out() / r.name);
  for (const Series& series : r.series) s.add(fs::path(r.name) / (series.name + ".csv"));
  s.add(fs::path(r.name) / "summary.txt");
  std::cout << r.summary();
  const bool ok = r.audit();
  return s.finish(ok ? kOk : kCriteriaFailed, ok ? "criteria met" : "criteria failed");
}

std::optional<fs::path> latest_checkpoint(const fs::path& out) {
  const fs::path dir = out / "checkpoints";
  if (!fs::is_directory(dir)) return std::nullopt;
  std::optional<fs::path> best;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (!e.is_directory() || name.rfind("step_", 0) != 0 || name.ends_with(".tmp")) continue;
    if (!best || name > best->filename().string()) best = e.path();
  }
  return best;
}

int simulate(const Common& c, bool resume) {
  const SimConfig cfg = load(c);
  return in_session(c.out, "simulate", [&](Session& s) {
    s.store_config(cfg);
    const Simulator sim(cfg);
    RunOptions opt;
    opt.out_dir = c.out;
    if (resume) {
      if (auto ck = latest_checkpoint(c.out)) {
        SimState st = read_checkpoint(*ck);
        EnergyLedger prior = EnergyLedger::read_csv(fs::path(c.out) / "ledger.csv", cfg.dt);
        NLAGG_REQUIRE(prior.records.size() > static_cast<std::size_t>(st.step), ErrorKind::SizeMismatch,
                      "ledger.csv is shorter than the checkpoint step");
        prior.records.resize(static_cast<std::size_t>(st.step) + 1);
        std::cout << "resuming from " << ck->string() << " (step " << st.step << ")\n";
        opt.prior_records = std::move(prior.records);
        opt.start = std::move(st);
      } else {
        std::cout << "no checkpoint found; starting from t = 0\n";
      }
    }
    RunResult res;
    try {
      res = run(sim, opt);
    } catch (const StepError&) {
      s.add("ledger.csv");
      throw;
    }
    for (const fs::path& p : res.outputs) s.add(p);

    const double drift = relative_mass_drift(res.ledger);
    const long violations = energy_violations(res.ledger);
    const double margin = min_separation_margin(res.ledger);
    const EnergyRecord& last = res.ledger.records.back();
    std::cout << "steps " << res.final_state.step << ", t = " << last.t << "\n"
              << "E_total " << last.e_total << ", |u| " << last.u_l2 << "\n"
              << "stationary residual " << stationary_residual(res.final_state.ch.phi, sim.kernel(), cfg.potential)
              << "\nrelative mass drift " << drift << "\nenergy violations " << violations
              << "\nmin separation margin " << margin << '\n';
    const bool ok = drift <= 1e-9 && violations == 0 && margin > 0.0;
    return s.finish(ok ? kOk : kCriteriaFailed, ok ? "mass, energy and separation checks met" : "run checks failed");
  });
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::InvalidValue, "bad list entry '" + item + "'");
    v.push_back(x);
  }
  return v;
}

int export_csv(const std::string& input, const std::string& output) {
  fs::path in = input;
  if (fs::is_directory(in)) in /= "phi.fld";
  const FieldFile f = read_field(in);
  std::ofstream out(output, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + output);
  out.precision(17);
  if (const auto* sf = std::get_if<ScalarField>(&f.field)) {
    const Domain& d = sf->domain();
    out << "x,y,value\n";
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) out << d.xc(i) << ',' << d.yc(j) << ',' << (*sf)(i, j) << '\n';
  } else {
    const VectorField& v = std::get<VectorField>(f.field);
    const Domain& d = v.domain();
    out << "component,x,y,value\n";
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i <= d.nx; ++i) out << "x," << i * d.hx() << ',' << d.yc(j) << ',' << v.x(i, j) << '\n';
    for (int j = 0; j <= d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) out << "y," << d.xc(i) << ',' << j * d.hy() << ',' << v.y(i, j) << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing " + output);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal AGG two-phase flow simulator and verification experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common c;
  bool resume = false;
  std::string eps = "0,0.4,0.2,0.1,0.05";
  std::string deltas = "0,1e-2,1e-3,1e-4";
  std::string grids = "32,64,128";
  std::uint64_t seed_value = 1;
  int samples = 50;
  std::string input;

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", c.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "Output directory")->required();
    sub->add_option("--grid", c.grid, "Override nx = ny");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { c.seed = v; }, "Override initial.seed");
  };

  auto* sim = app.add_subcommand("simulate", "Run the coupled time loop");
  with_config(sim);
  sim->add_flag("--resume", resume, "Continue from the newest checkpoint in --out");

  auto* stab = app.add_subcommand("stability-study", "AGG against Model H as the density gap shrinks");
  with_config(stab);
  stab->add_option("--eps", eps, "Comma-separated density gaps (rho1 = config rho1)");

  auto* dep = app.add_subcommand("dependence-study", "Continuous dependence on the initial phase field");
  with_config(dep);
  dep->add_option("--deltas", deltas, "Comma-separated perturbation sizes");

  auto* press = app.add_subcommand("pressure-study", "L4 pressure interpolation ratios");
  press->add_option("--out", c.out, "Output directory")->required();
  press->add_option("--grid", grids, "Comma-separated grid sizes");
  press->add_option("--seed", seed_value, "First forcing seed");
  press->add_option("--samples", samples, "Forcings per grid");

  auto* yos = app.add_subcommand("yosida-check", "Yosida approximation property suite");
  yos->add_option("--out", c.out, "Output directory")->required();
  yos->add_option("--config", c.config, "Take alpha and the kernel from this configuration")
      ->check(CLI::ExistingFile);

  auto* rst = app.add_subcommand("restart", "Checkpoint restart reproduces the run bitwise");
  with_config(rst);

  auto* exp = app.add_subcommand("export-csv", "Convert a field snapshot (or checkpoint phi) to CSV");
  exp->add_option("input", input, "Field file or checkpoint directory")->required();
  exp->add_option("--out", c.out, "CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  if (const char* t = std::getenv("NLAGG_THREADS")) set_thread_cap(std::max(1, std::atoi(t)));

  try {
    if (*sim) return simulate(c, resume);
    if (*stab) {
      const SimConfig cfg = load(c);
      const std::vector<double> list = parse_list(eps);
      return in_session(c.out, "stability-study", [&](Session& s) {
        s.store_config(cfg);
        return report_result(s, run_stability_experiment(cfg, cfg.fluid.rho1, list));
      });
    }
    if (*dep) {
      const SimConfig cfg = load(c);
      const std::vector<double> list = parse_list(deltas);
      return in_session(c.out, "dependence-study", [&](Session& s) {
        s.store_config(cfg);
        return report_result(s, run_continuous_dependence(cfg, list));
      });
    }
    if (*press) {
      std::vector<int> ns;
      for (double v : parse_list(grids)) ns.push_back(static_cast<int>(v));
      return in_session(c.out, "pressure-study", [&](Session& s) {
        return report_result(s, run_pressure_interpolation_study(ns, samples, seed_value));
      });
    }
    if (*yos) {
      PotentialSpec p;
      double w11 = 0.0;
      if (!c.config.empty()) {
        const SimConfig cfg = parse_config(c.config);
        p = cfg.potential;
        w11 = kernel_w11_norm(KernelSpec::make(cfg.kernel, cfg.domain));
      }
      return in_session(c.out, "yosida-check", [&](Session& s) {
        return report_result(s, run_yosida_suite(p, {1e-2, 1e-3, 1e-4}, w11));
      });
    }
    if (*rst) {
      const SimConfig cfg = load(c);
      return in_session(c.out, "restart", [&](Session& s) {
        s.store_config(cfg);
        return report_result(s, run_separated_uniqueness_check(cfg, fs::path(c.out) / "restart_scratch"));
      });
    }
    if (*exp) return export_csv(input, c.out);
  } catch (const Error& e) {
    std::cerr << "nlagg: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "nlagg: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
