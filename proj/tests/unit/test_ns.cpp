#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "nlagg/nch.hpp"
#include "nlagg/ns.hpp"

using namespace nlagg;
using std::numbers::pi;

namespace {

// Discrete curl of psi = sin^2(pi x) sin^2(pi y) sampled at corners; exactly
// divergence free and zero on the walls.
VectorField curl_bump(const Domain& d) {
  VectorField v(d);
  auto psi = [](double x, double y) { return std::pow(std::sin(pi * x) * std::sin(pi * y), 2); };
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) v.x(i, j) = (psi(i * d.hx(), (j + 1) * d.hy()) - psi(i * d.hx(), j * d.hy())) / d.hy();
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      v.y(i, j) = -(psi((i + 1) * d.hx(), j * d.hy()) - psi(i * d.hx(), j * d.hy())) / d.hx();
  return v;
}

VectorField random_velocity(const Domain& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField v(d);
  for (auto& x : v.xs()) x = u(rng);
  for (auto& y : v.ys()) y = u(rng);
  v.enforce_no_slip();
  return v;
}

ScalarField bubble(const Domain& d) {
  return ScalarField::sample(d, [](double x, double y) {
    return -0.9 * std::tanh((std::hypot(x - 0.5, y - 0.5) - 0.25) / 0.1);
  });
}

NsState rest(const Domain& d) { return {VectorField(d), {ScalarField(d), true}, 0.0}; }

}  // namespace

TEST(Mixture, DensityAndViscosityBlends) {
  const Domain d = Domain::make(8, 8);
  const FluidParams fp{3.0, 1.0, 0.5, 0.1};
  ScalarField phi(d);
  phi[0] = 1.0, phi[1] = -1.0, phi[2] = 0.0, phi[3] = 1.3;
  const ScalarField rho = density(phi, fp), nu = viscosity(phi, fp);
  EXPECT_EQ(rho[0], 3.0);
  EXPECT_EQ(rho[1], 1.0);
  EXPECT_EQ(rho[2], 2.0);
  EXPECT_EQ(rho[3], 3.0);
  EXPECT_EQ(nu[0], 0.5);
  EXPECT_EQ(nu[1], 0.1);
  EXPECT_DOUBLE_EQ(nu[2], 0.3);
  EXPECT_EQ(nu[3], 0.5);
}

TEST(Mixture, LipschitzInPhase) {
  const FluidParams fp{5.0, 1.0, 2.0, 0.2};
  const Domain d = Domain::make(16, 16);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  ScalarField a(d), b(d);
  for (std::size_t q = 0; q < a.size(); ++q) a[q] = u(rng), b[q] = u(rng);
  const ScalarField ra = density(a, fp), rb = density(b, fp), na = viscosity(a, fp), nb = viscosity(b, fp);
  for (std::size_t q = 0; q < a.size(); ++q) {
    EXPECT_LE(std::abs(ra[q] - rb[q]), 2.0 * std::abs(a[q] - b[q]) + 1e-15);
    EXPECT_LE(std::abs(na[q] - nb[q]), 0.9 * std::abs(a[q] - b[q]) + 1e-15);
  }
}

TEST(FluidParams, Validation) {
  EXPECT_NO_THROW((FluidParams{1.0, 2.0, 0.1, 0.2}.validate()));
  for (const FluidParams& bad : {FluidParams{0.0, 1.0, 0.1, 0.1}, FluidParams{1.0, 1.0, -0.1, 0.1},
                                 FluidParams{1.0, std::nan(""), 0.1, 0.1}}) {
    try {
      bad.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
  }
}

TEST(NsStep, RestStateWithConstantPhaseStaysAtRest) {
  const Domain d = Domain::make(32, 32);
  const ScalarField phi(d, 0.3), mu(d, 0.7);
  const NsState s = ns_step(rest(d), phi, phi, mu, FluidParams{2.0, 1.0, 0.1, 0.05}, 1e-3);
  EXPECT_EQ(s.u.max_abs(), 0.0);
  EXPECT_DOUBLE_EQ(s.t, 1e-3);
}

TEST(NsStep, ModelHLimitIsBitwiseIndependentOfFluxFlag) {
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = bubble(d);
  const ScalarField mu = chemical_potential(phi, k, PotentialSpec{});
  NsState s0 = rest(d);
  s0.u = 0.3 * curl_bump(d);
  const FluidParams fp{1.0, 1.0, 0.1, 0.05};
  const NsState a = ns_step(s0, phi, phi, mu, fp, 1e-3, {true, {}});
  const NsState b = ns_step(s0, phi, phi, mu, fp, 1e-3, {false, {}});
  EXPECT_EQ(std::memcmp(a.u.xs().data(), b.u.xs().data(), a.u.xs().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(a.u.ys().data(), b.u.ys().data(), a.u.ys().size_bytes()), 0);
  EXPECT_EQ(std::memcmp(a.p.values.values().data(), b.p.values.values().data(), a.p.values.values().size_bytes()), 0);

  // With a density gap the flag matters.
  const FluidParams gap{2.0, 1.0, 0.1, 0.05};
  const NsState c = ns_step(s0, phi, phi, mu, gap, 1e-3, {true, {}});
  const NsState e = ns_step(s0, phi, phi, mu, gap, 1e-3, {false, {}});
  EXPECT_GT(norm_l2_vec(c.u - e.u), 0.0);
}

TEST(NsStep, StepIsDiscretelyDivergenceFree) {
  const Domain d = Domain::make(48, 48);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = bubble(d);
  const ScalarField mu = chemical_potential(phi, k, PotentialSpec{});
  NsState s = rest(d);
  s.u = random_velocity(d, 3);
  s = ns_step(s, phi, phi, mu, FluidParams{3.0, 1.0, 0.2, 0.05}, 1e-3);
  EXPECT_LE(relative_divergence(s.u), 1e-9);
  EXPECT_TRUE(s.u.is_no_slip());
  EXPECT_LE(std::abs(s.p.values.mean()), 1e-12);
}

TEST(NsStep, FirstStepFollowsProjectedCapillaryForce) {
  // From rest with rho = 1: u^1 = dt P(mu grad phi) + O(dt^2).
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = bubble(d);
  const ScalarField mu = chemical_potential(phi, k, PotentialSpec{});
  const VectorField target = leray_project(capillary_force(mu, phi));
  std::vector<double> rel;
  for (double dt : {4e-4, 2e-4, 1e-4}) {
    const NsState s = ns_step(rest(d), phi, phi, mu, FluidParams{1.0, 1.0, 0.1, 0.1}, dt);
    rel.push_back(norm_l2_vec(s.u - dt * target) / norm_l2_vec(dt * target));
  }
  EXPECT_LT(rel[0], 0.05);
  EXPECT_NEAR(rel[0] / rel[1], 2.0, 0.2);
  EXPECT_NEAR(rel[1] / rel[2], 2.0, 0.2);
}

TEST(NsStep, DecayingStokesModeMatchesFirstEigenvalue) {
  // E(t) ~ exp(-nu lambda_1 t) for the slowest symmetric Stokes mode of the
  // unit square, lambda_1 = 52.3447.
  const Domain d = Domain::make(64, 64);
  const double nu = 0.1, dt = 2e-3, lambda1 = 52.3447;
  const ScalarField phi(d), mu(d), rho(d, 1.0);
  const FluidParams fp{1.0, 1.0, nu, nu};
  NsState s = rest(d);
  s.u = 1e-3 * curl_bump(d);
  double prev = kinetic_energy(s.u, rho), e_half = 0.0;
  for (int n = 1; n <= 500; ++n) {
    s = ns_step(s, phi, phi, mu, fp, dt);
    const double e = kinetic_energy(s.u, rho);
    ASSERT_LT(e, prev) << "step " << n;
    prev = e;
    if (n == 250) e_half = e;
  }
  const double rate = std::log(e_half / prev) / 0.5;
  EXPECT_NEAR(rate, nu * lambda1, 0.1 * nu * lambda1);
}

TEST(NsStep, CflViolation) {
  const Domain d = Domain::make(16, 16);
  NsState s = rest(d);
  s.u = 50.0 * curl_bump(d);
  const ScalarField phi(d);
  try {
    ns_step(s, phi, phi, phi, FluidParams{}, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CflViolation);
  }
}

TEST(KineticEnergy, AnalyticValueAndScaling) {
  // 1/2 int |curl psi|^2 = 2 (int sin^4)(int pi^2 sin^2(2 pi x)) / 2 = 3 pi^2 / 16.
  std::vector<double> err;
  for (int n : {32, 64}) {
    const Domain d = Domain::make(n, n);
    const VectorField u = curl_bump(d);
    const double ke = kinetic_energy(u, ScalarField(d, 1.0));
    err.push_back(std::abs(ke - 3 * pi * pi / 16));
    EXPECT_NEAR(kinetic_energy(u, ScalarField(d, 2.5)), 2.5 * ke, 1e-13 * ke);
    EXPECT_EQ(kinetic_energy(VectorField(d), ScalarField(d, 1.0)), 0.0);
  }
  EXPECT_LT(err[1], 5e-3);
  EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(ViscousDissipation, ZeroLinearAndRigidRotation) {
  const Domain d = Domain::make(32, 32);
  const VectorField u = random_velocity(d, 9);
  const ScalarField nu(d, 0.3);
  EXPECT_EQ(viscous_dissipation(VectorField(d), nu), 0.0);
  EXPECT_NEAR(viscous_dissipation(u, 2.0 * nu), 2.0 * viscous_dissipation(u, nu), 1e-12 * viscous_dissipation(u, nu));

  // Rigid rotation has zero strain; viscosity vanishes near the walls where
  // no-slip truncates the field.
  VectorField rot(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) rot.x(i, j) = -(d.yc(j) - 0.5);
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) rot.y(i, j) = d.xc(i) - 0.5;
  const ScalarField disk = ScalarField::sample(d, [](double x, double y) { return std::hypot(x - 0.5, y - 0.5) < 0.3 ? 1.0 : 0.0; });
  EXPECT_LE(viscous_dissipation(rot, disk), 1e-25);
  EXPECT_GT(viscous_dissipation(rot, ScalarField(d, 1.0)), 0.1);
}

TEST(ViscousDissipation, KornLowerBound) {
  const Domain d = Domain::make(32, 32);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScalarField nu(d);
    for (auto& x : nu.values()) x = u(rng);
    double nu_min = 1.0;
    for (double x : nu.values()) nu_min = std::min(nu_min, x);
    const VectorField v = random_velocity(d, 100 + seed);
    const double g = norm_grad_vec(v);
    EXPECT_GE(viscous_dissipation(v, nu), 0.5 * nu_min * g * g * (1 - 1e-12));
  }
}

TEST(ViscousOperator, IsGradientOfHalfDissipation) {
  const Domain d = Domain::make(16, 16);
  const VectorField v = random_velocity(d, 21), w = random_velocity(d, 22);
  const ScalarField nu = ScalarField::sample(d, [](double x, double y) { return 0.2 + x * y; });
  const double h = 1e-6;
  const double fd =
      (viscous_dissipation(v + h * w, nu) - viscous_dissipation(v - h * w, nu)) / (4 * h);
  const double an = inner(apply_viscous(v, nu), w);
  EXPECT_NEAR(an, fd, 1e-6 * std::abs(an));
}

TEST(PressureRatio, ZeroInputAndScaleInvariance) {
  const Domain d = Domain::make(32, 32);
  try {
    pressure_l4_ratio(d, VectorField(d));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroInput);
  }
  const VectorField f = random_velocity(d, 31);
  const double a = pressure_l4_ratio(d, f), b = pressure_l4_ratio(d, 7.0 * f);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_GT(a, 0.0);
  EXPECT_NEAR(a, b, 1e-8 * a);
}
