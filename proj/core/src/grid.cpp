#include "nlagg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlagg {

Domain Domain::make(int nx, int ny, double lx, double ly) {
  NLAGG_REQUIRE(nx >= 8 && ny >= 8, ErrorKind::InvalidArgument,
                "grid needs at least 8 cells per axis, got " + std::to_string(nx) + "x" +
                    std::to_string(ny));
  NLAGG_REQUIRE(nx % 2 == 0 && ny % 2 == 0, ErrorKind::InvalidArgument,
                "cell counts must be even");
  NLAGG_REQUIRE(lx > 0.0 && ly > 0.0 && std::isfinite(lx) && std::isfinite(ly),
                ErrorKind::InvalidArgument, "domain extents must be positive");
  return Domain{nx, ny, lx, ly};
}

// ---------------------------------------------------------------- ScalarField

ScalarField::ScalarField(const Domain& d, double fill) : domain_(d), values_(d.cells(), fill) {}

ScalarField::ScalarField(const Domain& d, std::vector<double> values)
    : domain_(d), values_(std::move(values)) {
  NLAGG_REQUIRE(values_.size() == d.cells(), ErrorKind::SizeMismatch,
                "scalar field needs nx*ny values");
}

// Neumaier-compensated, so remove_mean leaves a mean at round-off of the
// entries rather than of the running sum.
double ScalarField::sum() const {
  double s = 0.0, c = 0.0;
  for (double v : values_) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return s + c;
}

double ScalarField::mean() const { return sum() / static_cast<double>(values_.size()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

void remove_mean(ScalarField& f) {
  const double m = f.mean();
  for (double& v : f.values()) v -= m;
}

// ---------------------------------------------------------------- VectorField

VectorField::VectorField(const Domain& d) : domain_(d), xs_(d.x_faces(), 0.0), ys_(d.y_faces(), 0.0) {}

VectorField::VectorField(const Domain& d, std::vector<double> xs, std::vector<double> ys)
    : domain_(d), xs_(std::move(xs)), ys_(std::move(ys)) {
  NLAGG_REQUIRE(xs_.size() == d.x_faces() && ys_.size() == d.y_faces(), ErrorKind::SizeMismatch,
                "vector field component sizes do not match the domain");
}

void VectorField::enforce_no_slip() {
  const int nx = domain_.nx, ny = domain_.ny;
  for (int j = 0; j < ny; ++j) {
    x(0, j) = 0.0;
    x(nx, j) = 0.0;
  }
  for (int i = 0; i < nx; ++i) {
    y(i, 0) = 0.0;
    y(i, ny) = 0.0;
  }
}

bool VectorField::is_no_slip() const {
  const int nx = domain_.nx, ny = domain_.ny;
  for (int j = 0; j < ny; ++j)
    if (x(0, j) != 0.0 || x(nx, j) != 0.0) return false;
  for (int i = 0; i < nx; ++i)
    if (y(i, 0) != 0.0 || y(i, ny) != 0.0) return false;
  return true;
}

double VectorField::max_abs() const {
  double m = 0.0;
  for (double v : xs_) m = std::max(m, std::abs(v));
  for (double v : ys_) m = std::max(m, std::abs(v));
  return m;
}

bool VectorField::all_finite() const {
  auto fin = [](double v) { return std::isfinite(v); };
  return std::all_of(xs_.begin(), xs_.end(), fin) && std::all_of(ys_.begin(), ys_.end(), fin);
}

VectorField& VectorField::operator+=(const VectorField& o) {
  for (std::size_t k = 0; k < xs_.size(); ++k) xs_[k] += o.xs_[k];
  for (std::size_t k = 0; k < ys_.size(); ++k) ys_[k] += o.ys_[k];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  for (std::size_t k = 0; k < xs_.size(); ++k) xs_[k] -= o.xs_[k];
  for (std::size_t k = 0; k < ys_.size(); ++k) ys_[k] -= o.ys_[k];
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (double& v : xs_) v *= s;
  for (double& v : ys_) v *= s;
  return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

// ------------------------------------------------------------------ operators

VectorField grad(const ScalarField& f) {
  const Domain& d = f.domain();
  const double hx = d.hx(), hy = d.hy();
  VectorField g(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) g.x(i, j) = (f(i, j) - f(i - 1, j)) / hx;
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) g.y(i, j) = (f(i, j) - f(i, j - 1)) / hy;
  return g;
}

ScalarField div(const VectorField& v) {
  const Domain& d = v.domain();
  const double hx = d.hx(), hy = d.hy();
  ScalarField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      out(i, j) = (v.x(i + 1, j) - v.x(i, j)) / hx + (v.y(i, j + 1) - v.y(i, j)) / hy;
  return out;
}

ScalarField laplace_neumann(const ScalarField& f) {
  ScalarField out(f.domain());
  apply_laplace_neumann(f.domain(), f.values(), out.values());
  return out;
}

void apply_laplace_neumann(const Domain& d, std::span<const double> in, std::span<double> out) {
  // Same arithmetic, in the same order, as div(grad(in)); wall fluxes are zero.
  const int nx = d.nx, ny = d.ny;
  const double hx = d.hx(), hy = d.hy();
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = row + i;
      const double c = in[k];
      const double gw = i > 0 ? (c - in[k - 1]) / hx : 0.0;
      const double ge = i < nx - 1 ? (in[k + 1] - c) / hx : 0.0;
      const double gs = j > 0 ? (c - in[k - nx]) / hy : 0.0;
      const double gn = j < ny - 1 ? (in[k + nx] - c) / hy : 0.0;
      out[k] = (ge - gw) / hx + (gn - gs) / hy;
    }
  }
}

VectorField laplace_velocity(const VectorField& v) {
  const Domain& d = v.domain();
  const int nx = d.nx, ny = d.ny;
  const double ihx2 = 1.0 / (d.hx() * d.hx()), ihy2 = 1.0 / (d.hy() * d.hy());
  VectorField out(d);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const double c = v.x(i, j);
      const double s = j > 0 ? v.x(i, j - 1) : -c;
      const double n = j < ny - 1 ? v.x(i, j + 1) : -c;
      out.x(i, j) = (v.x(i + 1, j) - 2.0 * c + v.x(i - 1, j)) * ihx2 + (n - 2.0 * c + s) * ihy2;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double c = v.y(i, j);
      const double w = i > 0 ? v.y(i - 1, j) : -c;
      const double e = i < nx - 1 ? v.y(i + 1, j) : -c;
      out.y(i, j) = (e - 2.0 * c + w) * ihx2 + (v.y(i, j + 1) - 2.0 * c + v.y(i, j - 1)) * ihy2;
    }
  return out;
}

void velocity_at_centres(const VectorField& v, ScalarField& ux, ScalarField& uy) {
  const Domain& d = v.domain();
  ux = ScalarField(d);
  uy = ScalarField(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      ux(i, j) = 0.5 * (v.x(i, j) + v.x(i + 1, j));
      uy(i, j) = 0.5 * (v.y(i, j) + v.y(i, j + 1));
    }
}

std::vector<double> corner_weights(const Domain& d) {
  std::vector<double> w(static_cast<std::size_t>(d.nx + 1) * (d.ny + 1), 1.0);
  for (int j = 0; j <= d.ny; ++j)
    for (int i = 0; i <= d.nx; ++i) {
      double wx = (i == 0 || i == d.nx) ? 0.5 : 1.0;
      double wy = (j == 0 || j == d.ny) ? 0.5 : 1.0;
      w[static_cast<std::size_t>(j) * (d.nx + 1) + i] = wx * wy;
    }
  return w;
}

VelocityGradient velocity_gradient(const VectorField& v) {
  const Domain& d = v.domain();
  const int nx = d.nx, ny = d.ny;
  const double hx = d.hx(), hy = d.hy();
  VelocityGradient g{ScalarField(d), ScalarField(d), {}, {}, corner_weights(d)};
  const std::size_t nc = static_cast<std::size_t>(nx + 1) * (ny + 1);
  g.dudy.assign(nc, 0.0);
  g.dvdx.assign(nc, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      g.dudx(i, j) = (v.x(i + 1, j) - v.x(i, j)) / hx;
      g.dvdy(i, j) = (v.y(i, j + 1) - v.y(i, j)) / hy;
    }
  // Corner (i,j) sits at (i*hx, j*hy). Walls use the reflected ghost value.
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * (nx + 1) + i;
      if (i > 0 && i < nx) {
        const double below = j > 0 ? v.x(i, j - 1) : -v.x(i, j);
        const double above = j < ny ? v.x(i, j) : -v.x(i, j - 1);
        g.dudy[k] = (above - below) / hy;
      }
      if (j > 0 && j < ny) {
        const double left = i > 0 ? v.y(i - 1, j) : -v.y(i, j);
        const double right = i < nx ? v.y(i, j) : -v.y(i - 1, j);
        g.dvdx[k] = (right - left) / hx;
      }
    }
  return g;
}

StrainRate strain_rate(const VectorField& v) {
  VelocityGradient g = velocity_gradient(v);
  StrainRate s{std::move(g.dudx), std::move(g.dvdy), {}, std::move(g.corner_weight)};
  s.dxy.resize(g.dudy.size());
  for (std::size_t k = 0; k < s.dxy.size(); ++k) s.dxy[k] = 0.5 * (g.dudy[k] + g.dvdx[k]);
  return s;
}

// ---------------------------------------------------------------------- norms

double inner(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s * a.domain().cell_area();
}

double inner(const VectorField& a, const VectorField& b) {
  double s = 0.0;
  auto ax = a.xs(), bx = b.xs(), ay = a.ys(), by = b.ys();
  for (std::size_t k = 0; k < ax.size(); ++k) s += ax[k] * bx[k];
  for (std::size_t k = 0; k < ay.size(); ++k) s += ay[k] * by[k];
  return s * a.domain().cell_area();
}

double norm_l2(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double norm_l4(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += (v * v) * (v * v);
  return std::pow(s * f.domain().cell_area(), 0.25);
}

double norm_linf(const ScalarField& f) { return f.max_abs(); }

double norm_grad(const ScalarField& f) { return norm_l2_vec(grad(f)); }

double norm_h1(const ScalarField& f) {
  const double a = norm_l2(f), b = norm_grad(f);
  return std::sqrt(a * a + b * b);
}

double norm_l2_vec(const VectorField& v) { return std::sqrt(inner(v, v)); }

double norm_grad_vec(const VectorField& v) {
  const VelocityGradient g = velocity_gradient(v);
  double centres = 0.0;
  for (std::size_t k = 0; k < g.dudx.size(); ++k)
    centres += g.dudx[k] * g.dudx[k] + g.dvdy[k] * g.dvdy[k];
  double corners = 0.0;
  for (std::size_t k = 0; k < g.dudy.size(); ++k)
    corners += g.corner_weight[k] * (g.dudy[k] * g.dudy[k] + g.dvdx[k] * g.dvdx[k]);
  return std::sqrt((centres + corners) * v.domain().cell_area());
}

double norm_sym_grad(const VectorField& v) {
  const StrainRate s = strain_rate(v);
  double centres = 0.0;
  for (std::size_t k = 0; k < s.dxx.size(); ++k) centres += s.dxx[k] * s.dxx[k] + s.dyy[k] * s.dyy[k];
  double corners = 0.0;
  for (std::size_t k = 0; k < s.dxy.size(); ++k) corners += 2.0 * s.corner_weight[k] * s.dxy[k] * s.dxy[k];
  return std::sqrt((centres + corners) * v.domain().cell_area());
}

}  // namespace nlagg
