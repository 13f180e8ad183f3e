#include "nlagg/linear_solver.hpp"

#include <cmath>
#include <memory>
#include <vector>

#include "nlagg/error.hpp"

namespace nlagg {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

namespace {

void project_out_mean(std::span<double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

}  // namespace

CgResult solve_pcg(const LinearMap& apply, const LinearMap& precondition,
                   std::span<const double> b, std::span<double> x, const CgOptions& opt) {
  NLAGG_REQUIRE(opt.max_iter > 0, ErrorKind::InvalidArgument, opt.label + ": iteration cap not set");
  const std::size_t n = b.size();
  std::vector<double> r(n), z(n), p(n), q(n), rhs(b.begin(), b.end());
  if (opt.project_mean) {
    project_out_mean(rhs);
    project_out_mean(x);
  }

  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }

  apply(x, q);
  for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - q[k];
  if (opt.project_mean) project_out_mean(r);

  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= opt.rel_tol * bnorm) return {0, rnorm / bnorm};

  precondition(r, z);
  if (opt.project_mean) project_out_mean(z);
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= opt.max_iter; ++it) {
    apply(p, q);
    const double pq = dot(p, q);
    NLAGG_REQUIRE(pq > 0.0 && std::isfinite(pq), ErrorKind::SolverDivergence,
                  opt.label + ": operator not positive definite on search direction");
    const double alpha = rz / pq;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * q[k];
    }
    if (opt.project_mean) project_out_mean(r);
    rnorm = std::sqrt(dot(r, r));
    if (rnorm <= opt.rel_tol * bnorm) {
      if (opt.project_mean) project_out_mean(x);
      return {it, rnorm / bnorm};
    }
    precondition(r, z);
    if (opt.project_mean) project_out_mean(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  throw Error(ErrorKind::SolverDivergence,
              opt.label + ": no convergence in " + std::to_string(opt.max_iter) +
                  " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")");
}

LinearMap jacobi(std::span<const double> diagonal) {
  auto inv = std::make_shared<std::vector<double>>(diagonal.size());
  for (std::size_t k = 0; k < diagonal.size(); ++k) (*inv)[k] = 1.0 / diagonal[k];
  return [inv](std::span<const double> in, std::span<double> out) {
    for (std::size_t k = 0; k < in.size(); ++k) out[k] = (*inv)[k] * in[k];
  };
}

}  // namespace nlagg
