#pragma once

// Symmetric interaction kernels and the bounded-domain convolutions
//   (J * f)(x)      = int_Omega J(x - y) f(y) dy
//   (grad J * f)(x) = int_Omega grad J(x - y) f(y) dy
// evaluated with the midpoint rule on the cell centres. Contributions from
// outside Omega are zero (zero padding); there is no periodic wraparound.

#include <memory>
#include <string>

#include "nlagg/grid.hpp"

namespace nlagg {

enum class KernelKind { Gaussian, Wendland };

struct KernelConfig {
  KernelKind kind = KernelKind::Gaussian;
  /// Gaussian: standard deviation epsilon (truncated at 6 epsilon).
  /// Wendland: support radius.
  double width = 0.05;
  /// Total mass int J.
  double strength = 1.0;
};

class KernelSpec {
public:
  /// Precomputes grid samples of J and grad J for the domain. Throws
  /// KernelTooWide when the support radius exceeds min(lx, ly) / 2.
  static KernelSpec make(const KernelConfig& cfg, const Domain& d);

  const KernelConfig& config() const;
  const Domain& domain() const;
  double support_radius() const;

  /// Continuous kernel and gradient (including the normalisation constant).
  double value(double x, double y) const;
  void gradient(double x, double y, double& gx, double& gy) const;

  /// Sum of J over the grid offsets times the cell area (the quadrature mass).
  double quadrature_mass() const;

  struct Data;
  const Data& data() const { return *data_; }

private:
  std::shared_ptr<const Data> data_;
};

/// Transform-based zero-padded convolution. KernelTooWide if the kernel was
/// built for a different grid.
ScalarField convolve(const KernelSpec& k, const ScalarField& f);

/// Face-centred grad J * f. Wall faces are set to zero to respect the
/// VectorField layout.
VectorField convolve_grad(const KernelSpec& k, const ScalarField& f);

/// Direct O(N^2) double sums; the reference for the transform path.
ScalarField convolve_direct(const KernelSpec& k, const ScalarField& f);
VectorField convolve_grad_direct(const KernelSpec& k, const ScalarField& f);

/// Quadrature of |J| + |grad J| over the lattice offsets inside the support.
double kernel_w11_norm(const KernelSpec& k);

struct YoungReport {
  double lhs = 0.0;  // ||grad J * f||_inf
  double rhs = 0.0;  // ||J||_{W11} ||f||_inf
  double ratio = 0.0;
  bool pass = true;
};

/// ||grad J * f||_inf <= ||J||_{W11} ||f||_inf.
YoungReport young_bound_check(const KernelSpec& k, const ScalarField& f);

std::string to_string(KernelKind kind);

}  // namespace nlagg
