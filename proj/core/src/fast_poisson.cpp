#include "nlagg/fast_poisson.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "fftw_guard.hpp"

namespace nlagg {

namespace {

// Eigenvalues of the 1D second difference (sign flipped) for each transform.
std::vector<double> cosine_modes(int n, double h) {
  std::vector<double> e(n);
  for (int k = 0; k < n; ++k) e[k] = (2.0 - 2.0 * std::cos(std::numbers::pi * k / n)) / (h * h);
  return e;
}

// DST-I on n-1 interior nodes and DST-II on n cells share the modes k = 1..n-1 (resp. 1..n).
std::vector<double> sine_modes(int count, int n, double h) {
  std::vector<double> e(count);
  for (int m = 0; m < count; ++m)
    e[m] = (2.0 - 2.0 * std::cos(std::numbers::pi * (m + 1) / n)) / (h * h);
  return e;
}

}  // namespace

struct FastPoisson::Impl {
  int rows = 0, cols = 0;   // transform array shape (slow = y, fast = x)
  int row0 = 0, col0 = 0;   // offset of the interior block inside the full component
  int stride = 0;           // row stride of the full component array
  std::vector<double> ex, ey;
  double norm = 1.0;
  double* buf = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (buf) fftw_free(buf);
  }
};

FastPoisson::FastPoisson(const Domain& d, Layout layout)
    : domain_(d), layout_(layout), impl_(std::make_unique<Impl>()) {
  Impl& m = *impl_;
  fftw_r2r_kind fy{}, fx{}, by{}, bx{};
  switch (layout) {
    case Layout::CellNeumann:
      m.rows = d.ny;
      m.cols = d.nx;
      m.stride = d.nx;
      m.ex = cosine_modes(d.nx, d.hx());
      m.ey = cosine_modes(d.ny, d.hy());
      fy = fx = FFTW_REDFT10;
      by = bx = FFTW_REDFT01;
      m.norm = 1.0 / (4.0 * d.nx * d.ny);
      break;
    case Layout::XFaceDirichlet:
      m.rows = d.ny;
      m.cols = d.nx - 1;
      m.col0 = 1;
      m.stride = d.nx + 1;
      m.ex = sine_modes(d.nx - 1, d.nx, d.hx());
      m.ey = sine_modes(d.ny, d.ny, d.hy());
      fy = FFTW_RODFT10;
      by = FFTW_RODFT01;
      fx = bx = FFTW_RODFT00;
      m.norm = 1.0 / (4.0 * d.nx * d.ny);
      break;
    case Layout::YFaceDirichlet:
      m.rows = d.ny - 1;
      m.cols = d.nx;
      m.row0 = 1;
      m.stride = d.nx;
      m.ex = sine_modes(d.nx, d.nx, d.hx());
      m.ey = sine_modes(d.ny - 1, d.ny, d.hy());
      fx = FFTW_RODFT10;
      bx = FFTW_RODFT01;
      fy = by = FFTW_RODFT00;
      m.norm = 1.0 / (4.0 * d.nx * d.ny);
      break;
  }
  std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
  m.buf = fftw_alloc_real(static_cast<std::size_t>(m.rows) * m.cols);
  m.forward = fftw_plan_r2r_2d(m.rows, m.cols, m.buf, m.buf, fy, fx, FFTW_ESTIMATE);
  m.backward = fftw_plan_r2r_2d(m.rows, m.cols, m.buf, m.buf, by, bx, FFTW_ESTIMATE);
}

FastPoisson::~FastPoisson() = default;

void FastPoisson::solve(std::span<double> data, double shift) const {
  Impl& m = *impl_;
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c)
      m.buf[static_cast<std::size_t>(r) * m.cols + c] =
          data[static_cast<std::size_t>(r + m.row0) * m.stride + c + m.col0];
  fftw_execute(m.forward);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) {
      const double e = shift + m.ex[c] + m.ey[r];
      double& v = m.buf[static_cast<std::size_t>(r) * m.cols + c];
      v = e == 0.0 ? 0.0 : v * m.norm / e;
    }
  fftw_execute(m.backward);
  std::fill(data.begin(), data.end(), 0.0);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c)
      data[static_cast<std::size_t>(r + m.row0) * m.stride + c + m.col0] =
          m.buf[static_cast<std::size_t>(r) * m.cols + c];
}

const FastPoisson& fast_poisson(const Domain& d, FastPoisson::Layout layout) {
  using Key = std::tuple<int, int, double, double, int>;
  thread_local std::map<Key, std::unique_ptr<FastPoisson>> cache;
  const Key key{d.nx, d.ny, d.lx, d.ly, static_cast<int>(layout)};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<FastPoisson>(d, layout)).first;
  return *it->second;
}

}  // namespace nlagg
