#include "nlagg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace nlagg {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::InvalidValue, "key '" + key + "': " + why);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

double as_double(const std::string& key, const std::string& raw) {
  double v = 0.0;
  const char* end = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc() || p != end || !std::isfinite(v)) invalid(key, "'" + raw + "' is not a finite number");
  return v;
}

long long as_integer(const std::string& key, const std::string& raw) {
  long long v = 0;
  const char* end = raw.data() + raw.size();
  auto [p, ec] = std::from_chars(raw.data(), end, v);
  if (ec != std::errc() || p != end) invalid(key, "'" + raw + "' is not an integer");
  return v;
}

bool as_bool(const std::string& key, const std::string& raw) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  invalid(key, "'" + raw + "' is not true or false");
}

template <class E>
E as_enum(const std::string& key, const std::string& raw, const std::map<std::string, E>& names) {
  auto it = names.find(unquote(raw));
  if (it != names.end()) return it->second;
  std::string allowed;
  for (const auto& [n, e] : names) allowed += (allowed.empty() ? "" : ", ") + n;
  invalid(key, "'" + raw + "' is not one of " + allowed);
}

const std::map<std::string, KernelKind> kKernels{{"gaussian", KernelKind::Gaussian},
                                                 {"wendland", KernelKind::Wendland}};
const std::map<std::string, PotentialKind> kPotentials{{"logarithmic", PotentialKind::Logarithmic},
                                                       {"quadratic", PotentialKind::Quadratic}};
const std::map<std::string, Advection> kAdvection{{"upwind", Advection::Upwind}, {"centered", Advection::Centered}};
const std::map<std::string, InitialPreset> kPresets{{"bubble", InitialPreset::Bubble},
                                                    {"random-mix", InitialPreset::RandomMix},
                                                    {"stratified", InitialPreset::Stratified}};

using Setter = std::function<void(SimConfig&, const std::string& key, const std::string& raw)>;

struct Field {
  bool required;
  Setter set;
};

Setter real(std::function<double&(SimConfig&)> at, bool must_be_positive) {
  return [at, must_be_positive](SimConfig& c, const std::string& key, const std::string& raw) {
    const double v = as_double(key, raw);
    if (must_be_positive && !(v > 0.0)) invalid(key, "must be positive");
    at(c) = v;
  };
}

template <class I>
Setter integer(std::function<I&(SimConfig&)> at, long long lo) {
  return [at, lo](SimConfig& c, const std::string& key, const std::string& raw) {
    const long long v = as_integer(key, raw);
    if (v < lo) invalid(key, "must be at least " + std::to_string(lo));
    at(c) = static_cast<I>(v);
  };
}

const std::map<std::string, Field>& schema() {
  static const std::map<std::string, Field> s = [] {
    std::map<std::string, Field> m;
    m["grid.nx"] = {true, integer<int>([](SimConfig& c) -> int& { return c.domain.nx; }, 8)};
    m["grid.ny"] = {true, integer<int>([](SimConfig& c) -> int& { return c.domain.ny; }, 8)};
    m["grid.lx"] = {false, real([](SimConfig& c) -> double& { return c.domain.lx; }, true)};
    m["grid.ly"] = {false, real([](SimConfig& c) -> double& { return c.domain.ly; }, true)};
    m["fluid.rho1"] = {false, real([](SimConfig& c) -> double& { return c.fluid.rho1; }, true)};
    m["fluid.rho2"] = {false, real([](SimConfig& c) -> double& { return c.fluid.rho2; }, true)};
    m["fluid.nu1"] = {false, real([](SimConfig& c) -> double& { return c.fluid.nu1; }, true)};
    m["fluid.nu2"] = {false, real([](SimConfig& c) -> double& { return c.fluid.nu2; }, true)};
    m["potential.alpha"] = {false, real([](SimConfig& c) -> double& { return c.potential.alpha; }, true)};
    m["potential.kind"] = {false, [](SimConfig& c, const std::string& k, const std::string& v) {
                             c.potential.kind = as_enum(k, v, kPotentials);
                           }};
    m["kernel.kind"] = {true, [](SimConfig& c, const std::string& k, const std::string& v) {
                          c.kernel.kind = as_enum(k, v, kKernels);
                        }};
    m["kernel.width"] = {true, real([](SimConfig& c) -> double& { return c.kernel.width; }, true)};
    m["kernel.strength"] = {true, real([](SimConfig& c) -> double& { return c.kernel.strength; }, false)};
    m["time.dt"] = {true, real([](SimConfig& c) -> double& { return c.dt; }, true)};
    m["time.t_end"] = {true, [](SimConfig& c, const std::string& k, const std::string& v) {
                         c.t_end = as_double(k, v);
                         if (c.t_end < 0.0) invalid(k, "must not be negative");
                       }};
    m["solver.lambda"] = {false, real([](SimConfig& c) -> double& { return c.lambda; }, true)};
    m["solver.newton_tol"] = {false, real([](SimConfig& c) -> double& { return c.newton_tol; }, true)};
    m["solver.newton_max"] = {false, integer<int>([](SimConfig& c) -> int& { return c.newton_max; }, 1)};
    m["solver.advection"] = {false, [](SimConfig& c, const std::string& k, const std::string& v) {
                               c.advection = as_enum(k, v, kAdvection);
                             }};
    m["solver.include_flux"] = {false, [](SimConfig& c, const std::string& k, const std::string& v) {
                                  c.include_flux = as_bool(k, v);
                                }};
    m["initial.preset"] = {true, [](SimConfig& c, const std::string& k, const std::string& v) {
                             c.initial.preset = as_enum(k, v, kPresets);
                           }};
    m["initial.amplitude"] = {false, real([](SimConfig& c) -> double& { return c.initial.amplitude; }, true)};
    m["initial.cx"] = {false, real([](SimConfig& c) -> double& { return c.initial.cx; }, false)};
    m["initial.cy"] = {false, real([](SimConfig& c) -> double& { return c.initial.cy; }, false)};
    m["initial.radius"] = {false, real([](SimConfig& c) -> double& { return c.initial.radius; }, true)};
    m["initial.width"] = {false, real([](SimConfig& c) -> double& { return c.initial.width; }, true)};
    m["initial.mean"] = {false, real([](SimConfig& c) -> double& { return c.initial.mean; }, false)};
    m["initial.seed"] = {false, integer<std::uint64_t>(
                                    [](SimConfig& c) -> std::uint64_t& { return c.initial.seed; }, 0)};
    m["initial.modes"] = {false, integer<int>([](SimConfig& c) -> int& { return c.initial.modes; }, 1)};
    m["output.snapshot_every"] = {false, integer<long>(
                                             [](SimConfig& c) -> long& { return c.output.snapshot_every; }, 0)};
    m["output.checkpoint_every"] = {false, integer<long>(
                                               [](SimConfig& c) -> long& { return c.output.checkpoint_every; }, 0)};
    return m;
  }();
  return s;
}

}  // namespace

SimConfig parse_config_string(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::InvalidValue, std::string("malformed config: ") + e.message() + " (line " +
                                             std::to_string(e.line()) + ")");
  }

  SimConfig cfg;
  cfg.domain = Domain{0, 0, 1.0, 1.0};
  std::set<std::string> seen;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(ErrorKind::UnknownKey, "key '" + section + "' outside any section");
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      auto it = schema().find(key);
      if (it == schema().end()) throw Error(ErrorKind::UnknownKey, "unknown key '" + key + "'");
      it->second.set(cfg, key, value.data());
      seen.insert(key);
    }
  }
  for (const auto& [key, field] : schema())
    if (field.required && !seen.contains(key)) throw Error(ErrorKind::MissingKey, "required key '" + key + "' is missing");

  try {
    cfg.domain = Domain::make(cfg.domain.nx, cfg.domain.ny, cfg.domain.lx, cfg.domain.ly);
    cfg.validate();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidArgument) throw;
    throw Error(ErrorKind::InvalidValue, e.what());
  }
  return cfg;
}

SimConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_string(text.str());
}

std::string to_string(InitialPreset p) {
  switch (p) {
    case InitialPreset::Bubble: return "bubble";
    case InitialPreset::RandomMix: return "random-mix";
    case InitialPreset::Stratified: return "stratified";
  }
  return "?";
}

std::string to_string(Advection a) { return a == Advection::Upwind ? "upwind" : "centered"; }

std::string format_config(const SimConfig& c) {
  auto g = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream o;
  o << "[grid]\nnx = " << c.domain.nx << "\nny = " << c.domain.ny << "\nlx = " << g(c.domain.lx)
    << "\nly = " << g(c.domain.ly) << "\n\n";
  o << "[fluid]\nrho1 = " << g(c.fluid.rho1) << "\nrho2 = " << g(c.fluid.rho2) << "\nnu1 = " << g(c.fluid.nu1)
    << "\nnu2 = " << g(c.fluid.nu2) << "\n\n";
  o << "[potential]\nalpha = " << g(c.potential.alpha) << "\nkind = \""
    << (c.potential.kind == PotentialKind::Logarithmic ? "logarithmic" : "quadratic") << "\"\n\n";
  o << "[kernel]\nkind = \"" << to_string(c.kernel.kind) << "\"\nwidth = " << g(c.kernel.width)
    << "\nstrength = " << g(c.kernel.strength) << "\n\n";
  o << "[time]\ndt = " << g(c.dt) << "\nt_end = " << g(c.t_end) << "\n\n";
  o << "[solver]\nlambda = " << g(c.lambda) << "\nnewton_tol = " << g(c.newton_tol)
    << "\nnewton_max = " << c.newton_max << "\nadvection = \"" << to_string(c.advection)
    << "\"\ninclude_flux = " << (c.include_flux ? "true" : "false") << "\n\n";
  o << "[initial]\npreset = \"" << to_string(c.initial.preset) << "\"\namplitude = " << g(c.initial.amplitude)
    << "\ncx = " << g(c.initial.cx) << "\ncy = " << g(c.initial.cy) << "\nradius = " << g(c.initial.radius)
    << "\nwidth = " << g(c.initial.width) << "\nmean = " << g(c.initial.mean) << "\nseed = " << c.initial.seed
    << "\nmodes = " << c.initial.modes << "\n\n";
  o << "[output]\nsnapshot_every = " << c.output.snapshot_every
    << "\ncheckpoint_every = " << c.output.checkpoint_every << "\n";
  return o.str();
}

}  // namespace nlagg
