#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "nlagg/checkpoint.hpp"
#include "nlagg/config.hpp"
#include "nlagg/field_io.hpp"
#include "nlagg/manifest.hpp"

using namespace nlagg;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = NLAGG_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(NLAGG_SCRATCH_DIR) / "cli_io" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::optional<ErrorKind> kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

const std::string kSmall = R"(
[grid]
nx = 16
ny = 16

[kernel]
kind = "gaussian"
width = 0.05
strength = 1.5

[time]
dt = 1e-3
t_end = 0.005

[solver]
lambda = 1e-6

[initial]
preset = "bubble"
width = 0.1
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NLAGG_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
  const SimConfig ref = parse_config(kSource / "configs" / "ref.toml");
  EXPECT_EQ(ref.domain.nx, 64);
  EXPECT_EQ(ref.kernel.kind, KernelKind::Gaussian);
  EXPECT_EQ(ref.kernel.width, 0.08);
  EXPECT_EQ(ref.lambda, 1e-6);
  EXPECT_EQ(ref.t_end, 20.0);
  EXPECT_EQ(ref.steps(), 20000);
  for (const char* name : {"energy.toml", "study.toml"}) EXPECT_NO_THROW(parse_config(kSource / "configs" / name));
}

TEST(Config, ErrorsNameTheProblem) {
  EXPECT_EQ(kind_of([] { parse_config_string(kSmall + "\n[fluid]\nrho_l = 2.0\n"); }), ErrorKind::UnknownKey);
  std::string bad_dt = kSmall;
  bad_dt.replace(bad_dt.find("dt = 1e-3"), 9, "dt = -1");
  EXPECT_EQ(kind_of([&] { parse_config_string(bad_dt); }), ErrorKind::InvalidValue);
  std::string no_kernel = kSmall;
  no_kernel.replace(no_kernel.find("width = 0.05"), 12, "");
  EXPECT_EQ(kind_of([&] { parse_config_string(no_kernel); }), ErrorKind::MissingKey);
  EXPECT_EQ(kind_of([] { parse_config_string(kSmall + "\n[solver]\nadvection = \"sideways\"\n"); }),
            ErrorKind::InvalidValue);
  EXPECT_EQ(kind_of([] { parse_config_string(kSmall + "\n[extras]\nfoo = 1\n"); }), ErrorKind::UnknownKey);
  EXPECT_EQ(kind_of([] { parse_config(kSource / "configs" / "missing.toml"); }), ErrorKind::Io);

  try {
    parse_config_string(bad_dt);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dt"), std::string::npos);
  }
}

TEST(Config, FormatRoundTripIsExact) {
  SimConfig cfg = parse_config_string(kSmall);
  cfg.fluid = {1.0 / 3.0, 2.0, 0.1, 0.07};
  cfg.advection = Advection::Centered;
  cfg.include_flux = false;
  cfg.initial.seed = 12345678901234ull;
  const std::string text = format_config(cfg);
  const SimConfig back = parse_config_string(text);
  EXPECT_EQ(format_config(back), text);
  EXPECT_EQ(back.fluid.rho1, 1.0 / 3.0);
  EXPECT_EQ(back.initial.seed, 12345678901234ull);
  EXPECT_EQ(back.advection, Advection::Centered);
  EXPECT_FALSE(back.include_flux);
}

TEST(FieldIo, ScalarVectorAndPressureRoundTrip) {
  const fs::path dir = scratch("fields");
  const Domain d = Domain::make(12, 10, 1.5, 1.0);
  const ScalarField f = ScalarField::sample(d, [](double x, double y) { return std::sin(7 * x) / (1 + y); });
  VectorField v(d);
  for (std::size_t k = 0; k < v.xs().size(); ++k) v.xs()[k] = 1.0 / (1.0 + k);
  for (std::size_t k = 0; k < v.ys().size(); ++k) v.ys()[k] = -std::sqrt(1.0 + k);
  v.enforce_no_slip();
  write_field(dir / "f.fld", f);
  write_field(dir / "p.fld", f, FieldKind::Pressure);
  write_field(dir / "v.fld", v);

  EXPECT_EQ(fs::file_size(dir / "f.fld"), kFieldHeaderBytes + 8 * d.cells());
  const ScalarField fb = read_scalar_field(dir / "f.fld");
  EXPECT_EQ(fb.domain(), d);
  EXPECT_EQ(std::memcmp(fb.values().data(), f.values().data(), f.values().size_bytes()), 0);
  EXPECT_EQ(read_field(dir / "p.fld").kind, FieldKind::Pressure);
  const VectorField vb = read_vector_field(dir / "v.fld");
  EXPECT_EQ(std::memcmp(vb.xs().data(), v.xs().data(), v.xs().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(vb.ys().data(), v.ys().data(), v.ys().size_bytes()), 0);
  EXPECT_EQ(kind_of([&] { read_scalar_field(dir / "v.fld"); }), ErrorKind::CorruptHeader);
}

TEST(FieldIo, CorruptFilesAreRejected) {
  const fs::path dir = scratch("corrupt");
  const Domain d = Domain::make(8, 8);
  write_field(dir / "a.fld", ScalarField(d, 1.0));
  fs::copy_file(dir / "a.fld", dir / "b.fld");
  fs::resize_file(dir / "a.fld", fs::file_size(dir / "a.fld") - 1);
  EXPECT_EQ(kind_of([&] { read_field(dir / "a.fld"); }), ErrorKind::SizeMismatch);
  {
    std::fstream io(dir / "b.fld", std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(0);
    io.write("XXXX", 4);
  }
  EXPECT_EQ(kind_of([&] { read_field(dir / "b.fld"); }), ErrorKind::CorruptHeader);
  // Too short to hold a header at all.
  std::ofstream(dir / "c.fld", std::ios::binary) << "NLAG";
  EXPECT_EQ(kind_of([&] { read_field(dir / "c.fld"); }), ErrorKind::SizeMismatch);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Simulator sim(parse_config_string(kSmall));
  const SimState s = sim.step(sim.initial_state());
  const fs::path dir = scratch("ck") / "step_1";
  write_checkpoint(s, dir);
  const SimState b = read_checkpoint(dir);
  EXPECT_EQ(b.step, 1);
  EXPECT_EQ(b.ch.t, s.ch.t);
  EXPECT_EQ(std::memcmp(b.ch.phi.values().data(), s.ch.phi.values().data(), s.ch.phi.values().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(b.ns.u.xs().data(), s.ns.u.xs().data(), s.ns.u.xs().size_bytes()), 0);
  EXPECT_FALSE(fs::exists(dir.string() + ".tmp"));
  EXPECT_EQ(kind_of([&] { read_checkpoint(dir.parent_path() / "nothing"); }), ErrorKind::CorruptHeader);
}

TEST(Manifest, HashesAndRoundTrip) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  const fs::path dir = scratch("manifest");
  RunManifest m;
  m.command = "simulate";
  m.config_hash = sha256_hex("x");
  m.version = "1.2.3";
  m.start_time = "2026-01-01T00:00:00Z";
  m.end_time = utc_timestamp();
  m.outputs = {"ledger.csv", "snapshots/step_00000010"};
  m.exit_status = 2;
  m.message = "criteria \"failed\"";
  m.write(dir);
  const RunManifest b = RunManifest::read(dir / "manifest.json");
  EXPECT_EQ(b.command, m.command);
  EXPECT_EQ(b.config_hash, m.config_hash);
  EXPECT_EQ(b.outputs, m.outputs);
  EXPECT_EQ(b.exit_status, 2);
  EXPECT_EQ(b.message, m.message);

  std::ofstream(dir / "broken.json") << "{\"command\": ";
  EXPECT_EQ(kind_of([&] { RunManifest::read(dir / "broken.json"); }), ErrorKind::CorruptHeader);
  std::ofstream(dir / "partial.json") << "{\"command\": \"x\"}";
  EXPECT_EQ(kind_of([&] { RunManifest::read(dir / "partial.json"); }), ErrorKind::CorruptHeader);
}

TEST(DirectoryLock, SecondWriterIsRefused) {
  const fs::path dir = scratch("lock");
  {
    DirectoryLock a(dir);
    EXPECT_TRUE(fs::exists(a.path()));
    EXPECT_EQ(kind_of([&] { DirectoryLock b(dir); }), ErrorKind::Io);
  }
  EXPECT_NO_THROW(DirectoryLock c(dir));
}

TEST(Cli, YosidaCheckPasses) {
  if (std::strlen(NLAGG_CLI) == 0) GTEST_SKIP() << "built without the command-line tool";
  const fs::path out = scratch("cli_yosida");
  EXPECT_EQ(run_cli("yosida-check --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "yosida" / "summary.txt"));
}

TEST(Cli, SimulateIsReproducibleAndRecordsConfigHash) {
  if (std::strlen(NLAGG_CLI) == 0) GTEST_SKIP() << "built without the command-line tool";
  const fs::path dir = scratch("cli_sim");
  std::ofstream(dir / "small.toml") << kSmall;
  const fs::path a = dir / "a", b = dir / "b";
  ASSERT_EQ(run_cli("simulate --config " + (dir / "small.toml").string() + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("simulate --config " + (dir / "small.toml").string() + " --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "ledger.csv"), slurp(b / "ledger.csv"));
  const RunManifest m = RunManifest::read(a / "manifest.json");
  EXPECT_EQ(m.config_hash, sha256_hex(slurp(a / "config.toml")));
  EXPECT_EQ(m.exit_status, 0);
  EXPECT_FALSE(fs::exists(a / ".nlagg.lock"));
}

TEST(Cli, ExitCodes) {
  if (std::strlen(NLAGG_CLI) == 0) GTEST_SKIP() << "built without the command-line tool";
  const fs::path dir = scratch("cli_codes");
  std::string bad = kSmall;
  bad.replace(bad.find("dt = 1e-3"), 9, "dt = -1");
  std::ofstream(dir / "bad.toml") << bad;
  EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.toml").string() + " --out " + (dir / "o1").string()), 1);

  std::ofstream(dir / "good.toml") << kSmall;
  DirectoryLock held(dir / "o2");
  EXPECT_EQ(run_cli("simulate --config " + (dir / "good.toml").string() + " --out " + (dir / "o2").string()), 1);
}

TEST(Cli, ExportCsv) {
  if (std::strlen(NLAGG_CLI) == 0) GTEST_SKIP() << "built without the command-line tool";
  const fs::path dir = scratch("cli_export");
  const Domain d = Domain::make(8, 8);
  write_field(dir / "phi.fld", ScalarField(d, 0.25));
  ASSERT_EQ(run_cli("export-csv " + (dir / "phi.fld").string() + " --out " + (dir / "phi.csv").string()), 0);
  std::ifstream in(dir / "phi.csv");
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,value");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 64);
}
