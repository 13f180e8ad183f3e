#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlagg/nch.hpp"
#include "nlagg/simulation.hpp"

using namespace nlagg;
using std::numbers::pi;

namespace {

const PotentialSpec kLog{};

ScalarField mixture(const Domain& d, std::uint64_t seed, double amp) {
  InitialCondition ic;
  ic.preset = InitialPreset::RandomMix;
  ic.seed = seed;
  ic.amplitude = amp;
  ic.mean = 0.1;
  ic.modes = 5;
  return initial_phase(d, ic);
}

// Smooth divergence-free swirl scaled to a maximum face speed.
VectorField swirl(const Domain& d, double speed) {
  VectorField v(d);
  auto psi = [&](double x, double y) { return std::pow(std::sin(pi * x) * std::sin(pi * y), 2); };
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) v.x(i, j) = (psi(i * d.hx(), (j + 1) * d.hy()) - psi(i * d.hx(), j * d.hy())) / d.hy();
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      v.y(i, j) = -(psi((i + 1) * d.hx(), j * d.hy()) - psi(i * d.hx(), j * d.hy())) / d.hx();
  v *= speed / v.max_abs();
  return v;
}

ChStepParams params(double dt, Advection adv = Advection::Upwind, double lambda = 1e-6) {
  ChStepParams prm;
  prm.dt = dt;
  prm.yosida = YosidaParams::make(lambda, 0.0);
  prm.advection = adv;
  return prm;
}

}  // namespace

TEST(ChemicalPotential, ZeroConstantAndOdd) {
  const Domain d = Domain::make(64, 64);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.03, 1.5}, d);
  EXPECT_EQ(chemical_potential(ScalarField(d), k, kLog).max_abs(), 0.0);

  const double c = 0.4;
  const ScalarField mu = chemical_potential(ScalarField(d, c), k, kLog);
  const double want = f_prime(kLog, c) - k.quadrature_mass() * c;
  const double r = k.support_radius();
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.xc(i) > r && d.xc(i) < 1 - r && d.yc(j) > r && d.yc(j) < 1 - r) EXPECT_NEAR(mu(i, j), want, 1e-12);

  const ScalarField phi = mixture(d, 3, 0.8);
  const ScalarField a = chemical_potential(phi, k, kLog), b = chemical_potential(-1.0 * phi, k, kLog);
  for (std::size_t q = 0; q < a.size(); ++q) EXPECT_EQ(a[q], -b[q]);
}

TEST(ChemicalPotential, RejectsPurePhase) {
  const Domain d = Domain::make(16, 16);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, d);
  ScalarField phi(d, 0.2);
  phi(3, 4) = 1.0;
  try {
    chemical_potential(phi, k, kLog);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
  EXPECT_TRUE(regularized_chemical_potential(phi, k, kLog, YosidaParams::make(1e-4, 0.0)).all_finite());
}

TEST(AdvectiveFlux, UpwindAndCentredFaceValues) {
  const Domain d = Domain::make(8, 8);
  const ScalarField phi = ScalarField::sample(d, [](double x, double y) { return x + 2 * y; });
  VectorField u(d);
  u.x(3, 2) = 0.5;
  u.x(5, 2) = -0.25;
  u.y(4, 6) = 1.0;
  const VectorField up = advective_flux(u, phi, Advection::Upwind);
  EXPECT_EQ(up.x(3, 2), 0.5 * phi(2, 2));
  EXPECT_EQ(up.x(5, 2), -0.25 * phi(5, 2));
  EXPECT_EQ(up.y(4, 6), phi(4, 5));
  const VectorField ce = advective_flux(u, phi, Advection::Centered);
  EXPECT_DOUBLE_EQ(ce.x(3, 2), 0.5 * 0.5 * (phi(2, 2) + phi(3, 2)));
  EXPECT_EQ(up.x(0, 2), 0.0);
}

TEST(ChStep, ConstantStateIsFixedAwayFromBoundaryLayer) {
  const Domain d = Domain::make(64, 64);
  const KernelSpec k = KernelSpec::make({KernelKind::Wendland, 0.1, 1.0}, d);
  const ChState s0{ScalarField(d, 0.3), chemical_potential(ScalarField(d, 0.3), k, kLog), 0.0};
  const ChState s1 = ch_step(s0, VectorField(d), params(1e-4), k, kLog);
  // Support radius plus several diffusion lengths sqrt(dt F'').
  const double margin = 0.1 + 0.2;
  double worst = 0.0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      if (d.xc(i) > margin && d.xc(i) < 1 - margin && d.yc(j) > margin && d.yc(j) < 1 - margin)
        worst = std::max(worst, std::abs(s1.phi(i, j) - 0.3));
  EXPECT_LE(worst, 1e-8);
  EXPECT_DOUBLE_EQ(s1.t, 1e-4);
}

TEST(ChStep, SingleStepMassWithDrift) {
  const Domain d = Domain::make(48, 48);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = mixture(d, 7, 0.9);
  const ChState s0{phi, chemical_potential(phi, k, kLog), 0.0};
  for (Advection adv : {Advection::Upwind, Advection::Centered}) {
    const ChState s1 = ch_step(s0, swirl(d, 2.0), params(1e-3, adv), k, kLog);
    EXPECT_LE(std::abs(s1.phi.mean() - s0.phi.mean()), 1e-11);
    EXPECT_LT(s1.phi.max_abs(), 1.0);
  }
}

TEST(ChStep, EnergyDecreasesWithoutFlow) {
  const Domain d = Domain::make(48, 48);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = mixture(d, 11, 0.9);
  ChState s{phi, chemical_potential(phi, k, kLog), 0.0};
  double e = ch_energy(s.phi, k, kLog);
  for (int n = 0; n < 20; ++n) {
    s = ch_step(s, VectorField(d), params(1e-3), k, kLog);
    const double next = ch_energy(s.phi, k, kLog);
    EXPECT_LE(next, e + 1e-10) << "step " << n;
    e = next;
  }
}

TEST(ChStep, EnergyLawResidualIsFirstOrder) {
  // d/dt E = -||grad mu||^2 + int phi u . grad mu; the discrete pairing is
  // the face flux against grad mu, which is -sum mu div(flux) by parts.
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi0 = mixture(d, 5, 0.8);
  const VectorField u = swirl(d, 1.0);
  std::vector<double> sums;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    ChState s{phi0, chemical_potential(phi0, k, kLog), 0.0};
    double total = 0.0;
    const int steps = static_cast<int>(std::lround(0.1 / dt));
    for (int n = 0; n < steps; ++n) {
      const double e0 = ch_energy(s.phi, k, kLog);
      const VectorField flux = advective_flux(u, s.phi, Advection::Centered);
      s = ch_step(s, u, params(dt, Advection::Centered), k, kLog);
      const VectorField gmu = grad(s.mu);
      const double r = ch_energy(s.phi, k, kLog) - e0 + dt * inner(gmu, gmu) - dt * inner(flux, gmu);
      total += std::abs(r);
    }
    sums.push_back(total);
  }
  const double order = std::log2(sums[0] / sums[2]) / 2.0;
  EXPECT_GE(order, 0.8) << sums[0] << " " << sums[1] << " " << sums[2];
  EXPECT_LE(order, 1.2) << sums[0] << " " << sums[1] << " " << sums[2];
}

TEST(ChStep, CflViolation) {
  const Domain d = Domain::make(16, 16);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, d);
  const ChState s{ScalarField(d, 0.1), chemical_potential(ScalarField(d, 0.1), k, kLog), 0.0};
  try {
    ch_step(s, swirl(d, 100.0), params(1e-2), k, kLog);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CflViolation);
  }
}

TEST(ChEnergy, MatchesDirectDoubleSum) {
  const Domain d = Domain::make(24, 20, 1.2, 1.0);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.5}, d);
  const ScalarField phi = mixture(d, 2, 0.85);
  const double h2 = d.cell_area();
  double local = 0.0, pair = 0.0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      local += f_value(kLog, phi(i, j)) * h2;
      for (int l = 0; l < d.ny; ++l)
        for (int m = 0; m < d.nx; ++m)
          pair += k.value((i - m) * d.hx(), (j - l) * d.hy()) * phi(i, j) * phi(m, l) * h2 * h2;
    }
  EXPECT_NEAR(ch_energy(phi, k, kLog), local - 0.5 * pair, 1e-10);
  EXPECT_EQ(ch_energy(ScalarField(d), k, kLog), 0.0);
  EXPECT_NEAR(ch_energy(-1.0 * phi, k, kLog), ch_energy(phi, k, kLog), 1e-14);
}

TEST(StationaryResidual, ZeroFieldAndDirectRecomputation) {
  const Domain d = Domain::make(64, 64);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.03, 1.5}, d);
  EXPECT_EQ(stationary_residual(ScalarField(d), k, kLog), 0.0);
  const ScalarField phi = mixture(d, 4, 0.8);
  const ScalarField mu = chemical_potential(phi, k, kLog);
  const double m = mu.mean();
  double sq = 0.0;
  for (std::size_t q = 0; q < mu.size(); ++q) sq += (mu[q] - m) * (mu[q] - m) * d.cell_area();
  EXPECT_NEAR(stationary_residual(phi, k, kLog), std::sqrt(sq), 1e-12 * std::sqrt(sq));
}

TEST(SeparationMargin, Values) {
  const Domain d = Domain::make(8, 8);
  EXPECT_EQ(separation_margin(ScalarField(d)), 1.0);
  ScalarField phi(d, 0.3);
  phi(2, 5) = -0.9;
  EXPECT_NEAR(separation_margin(phi), 0.1, 1e-15);
}
