#include "nlagg/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fftw_guard.hpp"

namespace nlagg {

namespace {

template <class T>
struct FftwBuffer {
  T* ptr = nullptr;
  explicit FftwBuffer(std::size_t n) : ptr(static_cast<T*>(fftw_malloc(sizeof(T) * n))) {
    if (!ptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

}  // namespace

struct KernelSpec::Data {
  KernelConfig cfg;
  Domain d;
  double radius = 0.0;
  double norm_const = 1.0;
  int px = 0, py = 0, pxc = 0;  // padded real shape py x px, complex shape py x pxc
  std::vector<std::complex<double>> centre_hat, gradx_hat, grady_hat;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Data() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  // Kernel profile without the normalisation constant.
  double raw(double x, double y) const {
    const double r2 = x * x + y * y;
    if (r2 > radius * radius) return 0.0;
    if (cfg.kind == KernelKind::Gaussian) return std::exp(-r2 / (2.0 * cfg.width * cfg.width));
    const double t = std::sqrt(r2) / cfg.width;
    const double a = 1.0 - t;
    return a * a * a * a * (4.0 * t + 1.0);
  }

  void raw_gradient(double x, double y, double& gx, double& gy) const {
    const double r2 = x * x + y * y;
    gx = gy = 0.0;
    if (r2 > radius * radius) return;
    double factor;  // grad = factor * (x, y)
    if (cfg.kind == KernelKind::Gaussian) {
      const double e2 = cfg.width * cfg.width;
      factor = -std::exp(-r2 / (2.0 * e2)) / e2;
    } else {
      const double R = cfg.width;
      const double a = 1.0 - std::sqrt(r2) / R;
      factor = -20.0 * a * a * a / (R * R);
    }
    gx = factor * x;
    gy = factor * y;
  }

  std::size_t padded_real() const { return static_cast<std::size_t>(px) * py; }
  std::size_t padded_complex() const { return static_cast<std::size_t>(pxc) * py; }

  // Transform a stencil given as a function of the signed lattice offset.
  template <class Fn>
  std::vector<std::complex<double>> transform_stencil(int ax_lo, int ax_hi, int ay_lo, int ay_hi,
                                                      Fn&& sample) const {
    FftwBuffer<double> in(padded_real());
    FftwBuffer<fftw_complex> out(padded_complex());
    std::fill(in.ptr, in.ptr + padded_real(), 0.0);
    for (int b = ay_lo; b <= ay_hi; ++b)
      for (int a = ax_lo; a <= ax_hi; ++a) {
        const int ia = ((a % px) + px) % px, ib = ((b % py) + py) % py;
        in.ptr[static_cast<std::size_t>(ib) * px + ia] = sample(a, b);
      }
    fftw_execute_dft_r2c(forward, in.ptr, out.ptr);
    std::vector<std::complex<double>> hat(padded_complex());
    for (std::size_t k = 0; k < hat.size(); ++k) hat[k] = {out.ptr[k][0], out.ptr[k][1]};
    return hat;
  }

  // Linear convolution of f with a transformed stencil; result read back from
  // the padded array at [0, out_nx) x [0, out_ny).
  std::vector<double> apply(const std::vector<std::complex<double>>& hat, const ScalarField& f,
                            int out_nx, int out_ny) const {
    FftwBuffer<double> in(padded_real());
    FftwBuffer<fftw_complex> spec(padded_complex());
    std::fill(in.ptr, in.ptr + padded_real(), 0.0);
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) in.ptr[static_cast<std::size_t>(j) * px + i] = f(i, j);
    fftw_execute_dft_r2c(forward, in.ptr, spec.ptr);
    const double scale = 1.0 / static_cast<double>(padded_real());
    for (std::size_t k = 0; k < hat.size(); ++k) {
      const std::complex<double> v = std::complex<double>(spec.ptr[k][0], spec.ptr[k][1]) * hat[k];
      spec.ptr[k][0] = v.real() * scale;
      spec.ptr[k][1] = v.imag() * scale;
    }
    fftw_execute_dft_c2r(backward, spec.ptr, in.ptr);
    std::vector<double> out(static_cast<std::size_t>(out_nx) * out_ny);
    for (int j = 0; j < out_ny; ++j)
      for (int i = 0; i < out_nx; ++i)
        out[static_cast<std::size_t>(j) * out_nx + i] = in.ptr[static_cast<std::size_t>(j) * px + i];
    return out;
  }
};

KernelSpec KernelSpec::make(const KernelConfig& cfg, const Domain& d) {
  NLAGG_REQUIRE(cfg.width > 0.0 && std::isfinite(cfg.width), ErrorKind::InvalidArgument,
                "kernel width must be positive");
  NLAGG_REQUIRE(std::isfinite(cfg.strength), ErrorKind::InvalidArgument,
                "kernel strength must be finite");
  auto data = std::make_shared<Data>();
  data->cfg = cfg;
  data->d = d;
  data->radius = cfg.kind == KernelKind::Gaussian ? 6.0 * cfg.width : cfg.width;
  NLAGG_REQUIRE(data->radius <= 0.5 * std::min(d.lx, d.ly) * (1.0 + 1e-12), ErrorKind::KernelTooWide,
                "kernel support radius " + std::to_string(data->radius) +
                    " exceeds half the smaller domain extent");

  const double hx = d.hx(), hy = d.hy(), area = d.cell_area();
  const int ax = static_cast<int>(std::floor(data->radius / hx)) + 1;
  const int ay = static_cast<int>(std::floor(data->radius / hy)) + 1;

  if (cfg.kind == KernelKind::Gaussian) {
    // Truncated Gaussian, renormalised so the lattice quadrature carries the full mass.
    double mass = 0.0;
    for (int b = -ay; b <= ay; ++b)
      for (int a = -ax; a <= ax; ++a) mass += data->raw(a * hx, b * hy) * area;
    data->norm_const = cfg.strength / mass;
  } else {
    data->norm_const = 7.0 * cfg.strength / (std::numbers::pi * cfg.width * cfg.width);
  }

  data->px = 2 * d.nx;
  data->py = 2 * d.ny;
  data->pxc = data->px / 2 + 1;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    FftwBuffer<double> in(data->padded_real());
    FftwBuffer<fftw_complex> out(data->padded_complex());
    data->forward = fftw_plan_dft_r2c_2d(data->py, data->px, in.ptr, out.ptr, FFTW_ESTIMATE);
    data->backward = fftw_plan_dft_c2r_2d(data->py, data->px, out.ptr, in.ptr, FFTW_ESTIMATE);
  }

  const Data& c = *data;
  const double nc = c.norm_const;
  data->centre_hat = c.transform_stencil(-(d.nx - 1), d.nx - 1, -(d.ny - 1), d.ny - 1,
                                         [&](int a, int b) { return nc * c.raw(a * hx, b * hy) * area; });
  data->gradx_hat = c.transform_stencil(-(d.nx - 1), d.nx, -(d.ny - 1), d.ny - 1, [&](int m, int b) {
    double gx, gy;
    c.raw_gradient((m - 0.5) * hx, b * hy, gx, gy);
    return nc * gx * area;
  });
  data->grady_hat = c.transform_stencil(-(d.nx - 1), d.nx - 1, -(d.ny - 1), d.ny, [&](int a, int m) {
    double gx, gy;
    c.raw_gradient(a * hx, (m - 0.5) * hy, gx, gy);
    return nc * gy * area;
  });

  KernelSpec k;
  k.data_ = std::move(data);
  return k;
}

const KernelConfig& KernelSpec::config() const { return data_->cfg; }
const Domain& KernelSpec::domain() const { return data_->d; }
double KernelSpec::support_radius() const { return data_->radius; }

double KernelSpec::value(double x, double y) const { return data_->norm_const * data_->raw(x, y); }

void KernelSpec::gradient(double x, double y, double& gx, double& gy) const {
  data_->raw_gradient(x, y, gx, gy);
  gx *= data_->norm_const;
  gy *= data_->norm_const;
}

double KernelSpec::quadrature_mass() const {
  const Domain& d = data_->d;
  const int ax = static_cast<int>(std::floor(data_->radius / d.hx())) + 1;
  const int ay = static_cast<int>(std::floor(data_->radius / d.hy())) + 1;
  double mass = 0.0;
  for (int b = -ay; b <= ay; ++b)
    for (int a = -ax; a <= ax; ++a) mass += value(a * d.hx(), b * d.hy());
  return mass * d.cell_area();
}

namespace {

void require_same_grid(const KernelSpec& k, const Domain& d) {
  NLAGG_REQUIRE(k.domain() == d, ErrorKind::KernelTooWide,
                "kernel samples were built for a different grid");
}

}  // namespace

ScalarField convolve(const KernelSpec& k, const ScalarField& f) {
  const Domain& d = f.domain();
  require_same_grid(k, d);
  return ScalarField(d, k.data().apply(k.data().centre_hat, f, d.nx, d.ny));
}

VectorField convolve_grad(const KernelSpec& k, const ScalarField& f) {
  const Domain& d = f.domain();
  require_same_grid(k, d);
  VectorField out(d, k.data().apply(k.data().gradx_hat, f, d.nx + 1, d.ny),
                  k.data().apply(k.data().grady_hat, f, d.nx, d.ny + 1));
  out.enforce_no_slip();
  return out;
}

ScalarField convolve_direct(const KernelSpec& k, const ScalarField& f) {
  const Domain& d = f.domain();
  require_same_grid(k, d);
  const double hx = d.hx(), hy = d.hy(), area = d.cell_area();
  ScalarField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      double s = 0.0;
      for (int l = 0; l < d.ny; ++l)
        for (int m = 0; m < d.nx; ++m) s += k.value((i - m) * hx, (j - l) * hy) * area * f(m, l);
      out(i, j) = s;
    }
  return out;
}

VectorField convolve_grad_direct(const KernelSpec& k, const ScalarField& f) {
  const Domain& d = f.domain();
  require_same_grid(k, d);
  const double hx = d.hx(), hy = d.hy(), area = d.cell_area();
  VectorField out(d);
  double gx, gy;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      double s = 0.0;
      for (int l = 0; l < d.ny; ++l)
        for (int m = 0; m < d.nx; ++m) {
          k.gradient((i - m - 0.5) * hx, (j - l) * hy, gx, gy);
          s += gx * area * f(m, l);
        }
      out.x(i, j) = s;
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      double s = 0.0;
      for (int l = 0; l < d.ny; ++l)
        for (int m = 0; m < d.nx; ++m) {
          k.gradient((i - m) * hx, (j - l - 0.5) * hy, gx, gy);
          s += gy * area * f(m, l);
        }
      out.y(i, j) = s;
    }
  return out;
}

double kernel_w11_norm(const KernelSpec& k) {
  const Domain& d = k.domain();
  const int ax = static_cast<int>(std::floor(k.support_radius() / d.hx())) + 1;
  const int ay = static_cast<int>(std::floor(k.support_radius() / d.hy())) + 1;
  double sum = 0.0, gx, gy;
  for (int b = -ay; b <= ay; ++b)
    for (int a = -ax; a <= ax; ++a) {
      k.gradient(a * d.hx(), b * d.hy(), gx, gy);
      sum += std::abs(k.value(a * d.hx(), b * d.hy())) + std::hypot(gx, gy);
    }
  return sum * d.cell_area();
}

YoungReport young_bound_check(const KernelSpec& k, const ScalarField& f) {
  YoungReport rep;
  const double fmax = f.max_abs();
  if (fmax == 0.0) return rep;
  rep.lhs = convolve_grad(k, f).max_abs();
  rep.rhs = kernel_w11_norm(k) * fmax;
  rep.ratio = rep.lhs / rep.rhs;
  rep.pass = rep.ratio <= 1.0 + 1e-8;
  return rep;
}

std::string to_string(KernelKind kind) {
  return kind == KernelKind::Gaussian ? "gaussian" : "wendland";
}

}  // namespace nlagg
