#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlagg/kernel.hpp"

using namespace nlagg;
using std::numbers::pi;

namespace {

ScalarField random_scalar(const Domain& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(d);
  for (auto& v : f.values()) v = u(rng);
  return f;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

ScalarField smooth(const Domain& d) {
  return ScalarField::sample(d, [](double x, double y) { return std::cos(pi * x) * std::sin(2 * pi * y) + 0.3 * x; });
}

// 2x2 block averages of a field on the doubled grid.
ScalarField coarsen(const ScalarField& fine, const Domain& coarse) {
  ScalarField out(coarse);
  for (int j = 0; j < coarse.ny; ++j)
    for (int i = 0; i < coarse.nx; ++i)
      out(i, j) = 0.25 * (fine(2 * i, 2 * j) + fine(2 * i + 1, 2 * j) + fine(2 * i, 2 * j + 1) + fine(2 * i + 1, 2 * j + 1));
  return out;
}

}  // namespace

TEST(Convolve, TransformMatchesDirectSum) {
  const KernelConfig gauss{KernelKind::Gaussian, 0.03, 1.5};
  const KernelConfig wend{KernelKind::Wendland, 0.2, 0.7};
  for (const KernelConfig& cfg : {gauss, wend}) {
    for (const Domain& d : {Domain::make(32, 32), Domain::make(48, 40, 1.2, 1.0)}) {
      const KernelSpec k = KernelSpec::make(cfg, d);
      const ScalarField f = random_scalar(d, 4);
      EXPECT_LE(max_abs_diff(convolve(k, f).values(), convolve_direct(k, f).values()), 1e-12 * f.max_abs());
      const VectorField g = convolve_grad(k, f), gd = convolve_grad_direct(k, f);
      const double scale = kernel_w11_norm(k) * f.max_abs();
      EXPECT_LE(max_abs_diff(g.xs(), gd.xs()), 1e-12 * scale);
      EXPECT_LE(max_abs_diff(g.ys(), gd.ys()), 1e-12 * scale);
    }
  }
}

TEST(Convolve, SymmetricBilinearForm) {
  const Domain d = Domain::make(40, 32, 1.0, 0.8);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, d);
  const ScalarField f = random_scalar(d, 1), g = random_scalar(d, 2);
  const double a = inner(convolve(k, f), g), b = inner(convolve(k, g), f);
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(Convolve, SampledKernelIsSymmetric) {
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, Domain::make(32, 32));
  for (double x : {0.0, 0.03125, 0.1, 0.2})
    for (double y : {0.0, 0.0625, 0.15}) {
      EXPECT_EQ(k.value(x, y), k.value(-x, -y));
      double gx, gy, hx, hy;
      k.gradient(x, y, gx, gy);
      k.gradient(-x, -y, hx, hy);
      EXPECT_EQ(gx, -hx);
      EXPECT_EQ(gy, -hy);
    }
}

TEST(Convolve, ConstantFieldInsideSupport) {
  const Domain d = Domain::make(64, 64);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.03, 1.5}, d);
  const double c = 0.37;
  const ScalarField jc = convolve(k, ScalarField(d, c));
  const VectorField gc = convolve_grad(k, ScalarField(d, c));
  const double r = k.support_radius();
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const double x = d.xc(i), y = d.yc(j);
      if (x - r < 0 || x + r > d.lx || y - r < 0 || y + r > d.ly) continue;
      EXPECT_NEAR(jc(i, j), c * k.quadrature_mass(), 1e-12);
      EXPECT_LE(std::abs(gc.x(i, j)) + std::abs(gc.y(i, j)), 1e-10);
    }
}

TEST(Convolve, PointMassRecoversGradientProfile) {
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Wendland, 0.3, 1.0}, d);
  ScalarField f(d);
  const int i0 = 13, j0 = 17;
  f(i0, j0) = 1.0 / d.cell_area();
  const VectorField g = convolve_grad(k, f);
  double gx, gy;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      k.gradient(i * d.hx() - d.xc(i0), d.yc(j) - d.yc(j0), gx, gy);
      EXPECT_NEAR(g.x(i, j), gx, 1e-11 * (1 + std::abs(gx)));
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      k.gradient(d.xc(i) - d.xc(i0), j * d.hy() - d.yc(j0), gx, gy);
      EXPECT_NEAR(g.y(i, j), gy, 1e-11 * (1 + std::abs(gy)));
    }
}

TEST(Convolve, GradientCommutesToSecondOrder) {
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    const Domain d = Domain::make(n, n);
    const KernelSpec k = KernelSpec::make({KernelKind::Wendland, 0.3, 1.0}, d);
    const ScalarField f = smooth(d);
    const VectorField a = convolve_grad(k, f), b = grad(convolve(k, f));
    err.push_back(std::max(max_abs_diff(a.xs(), b.xs()), max_abs_diff(a.ys(), b.ys())));
  }
  EXPECT_GT(err[0] / err[1], 3.0);
  EXPECT_GT(err[1] / err[2], 3.0);
}

TEST(Convolve, RefinementConsistency) {
  std::vector<ScalarField> out;
  for (int n : {32, 64, 128}) {
    const Domain d = Domain::make(n, n);
    out.push_back(convolve(KernelSpec::make({KernelKind::Wendland, 0.3, 1.0}, d), smooth(d)));
  }
  const double e1 = max_abs_diff(out[0].values(), coarsen(out[1], out[0].domain()).values());
  const double e2 = max_abs_diff(out[1].values(), coarsen(out[2], out[1].domain()).values());
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(Convolve, Errors) {
  try {
    KernelSpec::make({KernelKind::Gaussian, 0.1, 1.0}, Domain::make(32, 32));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KernelTooWide);
  }
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, Domain::make(32, 32));
  try {
    convolve(k, ScalarField(Domain::make(16, 16)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::KernelTooWide);
  }
}

TEST(KernelNorm, GaussianMassIsNormalised) {
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.1, 1.0}, Domain::make(64, 64, 2.0, 2.0));
  EXPECT_NEAR(k.quadrature_mass(), 1.0, 1e-6);
  EXPECT_GT(kernel_w11_norm(k), 1.0);
}

TEST(KernelNorm, WendlandMatchesExactIntegral) {
  // int |J| = s and int |grad J| = 14 s / (3 R) for the normalised C2 Wendland function.
  const double R = 0.25, s = 2.0;
  const KernelSpec k = KernelSpec::make({KernelKind::Wendland, R, s}, Domain::make(512, 512));
  EXPECT_NEAR(kernel_w11_norm(k), s * (1.0 + 14.0 / (3.0 * R)), 1e-3 * s * (1.0 + 14.0 / (3.0 * R)));
}

TEST(KernelNorm, LinearInStrength) {
  const Domain d = Domain::make(32, 32);
  const double a = kernel_w11_norm(KernelSpec::make({KernelKind::Gaussian, 0.05, 1.0}, d));
  const double b = kernel_w11_norm(KernelSpec::make({KernelKind::Gaussian, 0.05, 3.0}, d));
  EXPECT_NEAR(b, 3.0 * a, 1e-12 * b);
}

TEST(Young, RandomFieldsSatisfyBound) {
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.04, 1.5}, d);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const YoungReport r = young_bound_check(k, random_scalar(d, seed));
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.ratio, 1.0 + 1e-8);
  }
  const YoungReport z = young_bound_check(k, ScalarField(d));
  EXPECT_EQ(z.ratio, 0.0);
  EXPECT_TRUE(z.pass);
}

TEST(Young, SignPatternAttainsComponentMaximum) {
  // f = sign(d_x J(x_face - y)) makes the x-component at that face equal to sum |d_x J| h^2,
  // the largest value any |f| <= 1 can produce there.
  const Domain d = Domain::make(32, 32);
  const KernelSpec k = KernelSpec::make({KernelKind::Gaussian, 0.04, 1.0}, d);
  const int i0 = 16, j0 = 16;
  ScalarField f(d);
  double oracle = 0.0, gx, gy;
  for (int l = 0; l < d.ny; ++l)
    for (int m = 0; m < d.nx; ++m) {
      k.gradient(i0 * d.hx() - d.xc(m), d.yc(j0) - d.yc(l), gx, gy);
      f(m, l) = gx >= 0 ? 1.0 : -1.0;
      oracle += std::abs(gx) * d.cell_area();
    }
  const VectorField g = convolve_grad(k, f);
  EXPECT_NEAR(g.x(i0, j0), oracle, 1e-12 * oracle);
  EXPECT_LE(young_bound_check(k, f).ratio, 1.0);
}
