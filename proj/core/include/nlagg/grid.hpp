#pragma once

// Uniform MAC grid on the rectangle [0,lx] x [0,ly].
//
// Scalars live at cell centres, index (i,j) -> j*nx + i.
// Velocity x-components live on vertical faces, (nx+1) x ny, index j*(nx+1) + i,
// with face i sitting at x = i*hx. y-components live on horizontal faces,
// nx x (ny+1), index j*nx + i, face j at y = j*hy. Boundary faces are walls
// (no-slip) and always hold zero.

#include <cstddef>
#include <span>
#include <vector>

#include "nlagg/error.hpp"

namespace nlagg {

struct Domain {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;

  /// Validating constructor: counts must be even and >= 8, extents positive.
  static Domain make(int nx, int ny, double lx = 1.0, double ly = 1.0);

  double hx() const { return lx / nx; }
  double hy() const { return ly / ny; }
  double cell_area() const { return hx() * hy(); }
  double area() const { return lx * ly; }
  std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t x_faces() const { return static_cast<std::size_t>(nx + 1) * ny; }
  std::size_t y_faces() const { return static_cast<std::size_t>(nx) * (ny + 1); }

  double xc(int i) const { return (i + 0.5) * hx(); }
  double yc(int j) const { return (j + 0.5) * hy(); }

  friend bool operator==(const Domain&, const Domain&) = default;
};

class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(const Domain& d, double fill = 0.0);
  ScalarField(const Domain& d, std::vector<double> values);

  template <class Fn>
  static ScalarField sample(const Domain& d, Fn&& fn) {
    ScalarField f(d);
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) f(i, j) = fn(d.xc(i), d.yc(j));
    return f;
  }

  const Domain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * domain_.nx + i]; }
  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(j) * domain_.nx + i];
  }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }

  double mean() const;
  double sum() const;
  double max_abs() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

private:
  Domain domain_{};
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

class VectorField {
public:
  VectorField() = default;
  explicit VectorField(const Domain& d);
  VectorField(const Domain& d, std::vector<double> xs, std::vector<double> ys);

  const Domain& domain() const { return domain_; }

  double& x(int i, int j) { return xs_[static_cast<std::size_t>(j) * (domain_.nx + 1) + i]; }
  double x(int i, int j) const { return xs_[static_cast<std::size_t>(j) * (domain_.nx + 1) + i]; }
  double& y(int i, int j) { return ys_[static_cast<std::size_t>(j) * domain_.nx + i]; }
  double y(int i, int j) const { return ys_[static_cast<std::size_t>(j) * domain_.nx + i]; }

  std::span<double> xs() { return xs_; }
  std::span<const double> xs() const { return xs_; }
  std::span<double> ys() { return ys_; }
  std::span<const double> ys() const { return ys_; }

  /// Zero the wall faces.
  void enforce_no_slip();
  bool is_no_slip() const;
  double max_abs() const;
  bool all_finite() const;

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double s);

private:
  Domain domain_{};
  std::vector<double> xs_;
  std::vector<double> ys_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Cell-centred pressure; when mean_zero is set the spatial mean is removed.
struct PressureField {
  ScalarField values;
  bool mean_zero = true;

  const Domain& domain() const { return values.domain(); }
};

/// Shifts a pressure (or any scalar) to zero mean.
void remove_mean(ScalarField& f);

// ---- discrete differential operators ----

/// Face gradient; wall faces are zero (homogeneous Neumann ghost cells).
VectorField grad(const ScalarField& f);
/// Conservative face-difference divergence.
ScalarField div(const VectorField& v);
/// div(grad(f)); the 5-point Neumann Laplacian.
ScalarField laplace_neumann(const ScalarField& f);

/// In-place kernel computing exactly div(grad(in)) without temporaries.
void apply_laplace_neumann(const Domain& d, std::span<const double> in, std::span<double> out);

/// Component-wise vector Laplacian with no-slip ghost reflection for the
/// tangential direction. Output is zero on wall faces.
VectorField laplace_velocity(const VectorField& v);

/// Cell-centre averages of the two staggered velocity components.
void velocity_at_centres(const VectorField& v, ScalarField& ux, ScalarField& uy);

/// Discrete symmetric gradient: diagonal entries at cell centres, off-diagonal
/// at cell corners ((nx+1) x (ny+1), index j*(nx+1)+i).
struct StrainRate {
  ScalarField dxx;
  ScalarField dyy;
  std::vector<double> dxy;
  std::vector<double> corner_weight;  // 1 inside, 1/2 on walls, 1/4 at domain corners
};
StrainRate strain_rate(const VectorField& v);

/// Full velocity gradient pieces on the same layout as StrainRate.
struct VelocityGradient {
  ScalarField dudx;
  ScalarField dvdy;
  std::vector<double> dudy;
  std::vector<double> dvdx;
  std::vector<double> corner_weight;
};
VelocityGradient velocity_gradient(const VectorField& v);

/// Corner quadrature weights used by the corner-located gradient entries.
std::vector<double> corner_weights(const Domain& d);

// ---- norms (midpoint quadrature) ----

double norm_l2(const ScalarField& f);
double norm_l4(const ScalarField& f);
double norm_linf(const ScalarField& f);
double norm_h1(const ScalarField& f);
double norm_grad(const ScalarField& f);
double norm_l2_vec(const VectorField& v);
double norm_grad_vec(const VectorField& v);
/// ||Dv||_{L2} with the strain rate of strain_rate().
double norm_sym_grad(const VectorField& v);

double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

}  // namespace nlagg
