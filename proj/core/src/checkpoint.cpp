#include "nlagg/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nlagg/field_io.hpp"

namespace nlagg {

namespace fs = std::filesystem;

namespace {

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::CorruptHeader, "missing checkpoint manifest " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::CorruptHeader, "malformed manifest line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorKind::CorruptHeader, "checkpoint manifest lacks '" + key + "'");
  return it->second;
}

}  // namespace

void write_checkpoint(const SimState& s, const fs::path& dir) {
  const fs::path tmp = dir.string() + ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);
  write_field(tmp / "phi.fld", s.ch.phi);
  write_field(tmp / "mu.fld", s.ch.mu);
  write_field(tmp / "u.fld", s.ns.u);
  write_field(tmp / "p.fld", s.ns.p.values, FieldKind::Pressure);
  {
    std::ofstream out(tmp / "manifest.txt");
    out << "format_version=" << kCheckpointVersion << '\n'
        << "step=" << s.step << '\n'
        << "t=" << hexfloat(s.ch.t) << '\n'
        << "pressure_mean_zero=" << (s.ns.p.mean_zero ? 1 : 0) << '\n';
    if (!out) throw Error(ErrorKind::Io, "cannot write checkpoint manifest in " + tmp.string());
  }
  fs::remove_all(dir, ec);
  fs::rename(tmp, dir);
}

SimState read_checkpoint(const fs::path& dir) {
  const auto kv = read_manifest(dir / "manifest.txt");
  if (need(kv, "format_version") != std::to_string(kCheckpointVersion))
    throw Error(ErrorKind::CorruptHeader, "checkpoint format version " + need(kv, "format_version") +
                                              " (expected " + std::to_string(kCheckpointVersion) + ")");
  SimState s;
  try {
    s.step = std::stol(need(kv, "step"));
    s.ch.t = std::strtod(need(kv, "t").c_str(), nullptr);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::CorruptHeader, "checkpoint manifest has a malformed step or time");
  }
  s.ns.t = s.ch.t;
  s.ch.phi = read_scalar_field(dir / "phi.fld");
  s.ch.mu = read_scalar_field(dir / "mu.fld");
  s.ns.u = read_vector_field(dir / "u.fld");
  const FieldFile p = read_field(dir / "p.fld");
  if (p.kind != FieldKind::Pressure) throw Error(ErrorKind::CorruptHeader, "p.fld is not a pressure field");
  s.ns.p.values = std::get<ScalarField>(p.field);
  s.ns.p.mean_zero = need(kv, "pressure_mean_zero") == "1";
  const Domain& d = s.ch.phi.domain();
  if (!(s.ch.mu.domain() == d && s.ns.u.domain() == d && s.ns.p.domain() == d))
    throw Error(ErrorKind::SizeMismatch, "checkpoint fields live on different grids");
  return s;
}

}  // namespace nlagg
