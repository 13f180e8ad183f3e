#include "nlagg/inverse_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "nlagg/fast_poisson.hpp"
#include "nlagg/linear_solver.hpp"

namespace nlagg {

int default_iteration_cap(const Domain& d) { return 50 * std::max(d.nx, d.ny); }

namespace {

int cap_for(const Domain& d, const SolveOptions& opt) {
  return opt.max_iter > 0 ? opt.max_iter : default_iteration_cap(d);
}

std::vector<double> neumann_diagonal(const Domain& d) {
  std::vector<double> diag(d.cells());
  const double ihx2 = 1.0 / (d.hx() * d.hx()), ihy2 = 1.0 / (d.hy() * d.hy());
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      double v = 0.0;
      if (i > 0) v += ihx2;
      if (i < d.nx - 1) v += ihx2;
      if (j > 0) v += ihy2;
      if (j < d.ny - 1) v += ihy2;
      diag[static_cast<std::size_t>(j) * d.nx + i] = v;
    }
  return diag;
}

// Exact no-slip vector Laplacian inverse: out = (-Delta_h)^{-1} f.
VectorField inverse_vector_laplacian(const VectorField& f) {
  const Domain& d = f.domain();
  VectorField u = f;
  fast_poisson(d, FastPoisson::Layout::XFaceDirichlet).solve(u.xs(), 0.0);
  fast_poisson(d, FastPoisson::Layout::YFaceDirichlet).solve(u.ys(), 0.0);
  return u;
}

}  // namespace

ScalarField solve_neumann_poisson(const ScalarField& g, const SolveOptions& opt) {
  const Domain& d = g.domain();
  const double gmax = g.max_abs();
  if (gmax == 0.0) return ScalarField(d);
  const double m = g.mean();
  if (std::abs(m) > 1e-10 * gmax) {
    std::ostringstream msg;
    msg << "Neumann Poisson data has mean " << m << " (max |g| = " << gmax << ")";
    throw Error(ErrorKind::NonZeroMean, msg.str());
  }

  // -Delta_h is SPD on the mean-zero subspace.
  LinearMap apply = [&d](std::span<const double> in, std::span<double> out) {
    apply_laplace_neumann(d, in, out);
    for (double& v : out) v = -v;
  };
  LinearMap precondition;
  if (opt.preconditioner == Preconditioner::Spectral) {
    const FastPoisson& fp = fast_poisson(d, FastPoisson::Layout::CellNeumann);
    precondition = [&fp](std::span<const double> in, std::span<double> out) {
      std::copy(in.begin(), in.end(), out.begin());
      fp.solve(out, 0.0);
    };
  } else {
    precondition = jacobi(neumann_diagonal(d));
  }

  ScalarField f(d);
  CgOptions cg{opt.rel_tol, cap_for(d, opt), true, "neumann-poisson"};
  solve_pcg(apply, precondition, g.values(), f.values(), cg);
  remove_mean(f);
  return f;
}

StokesSolution solve_stokes(const VectorField& f, const SolveOptions& opt) {
  const Domain& d = f.domain();
  VectorField rhs = f;
  rhs.enforce_no_slip();

  const VectorField a_inv_f = inverse_vector_laplacian(rhs);
  // Schur complement S p = -div(A^{-1} grad p); right-hand side -div(A^{-1} f).
  ScalarField b = div(a_inv_f);
  b *= -1.0;

  LinearMap schur = [&d](std::span<const double> in, std::span<double> out) {
    ScalarField p(d, std::vector<double>(in.begin(), in.end()));
    const ScalarField s = div(inverse_vector_laplacian(grad(p)));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = -s[k];
  };
  LinearMap identity = [](std::span<const double> in, std::span<double> out) {
    std::copy(in.begin(), in.end(), out.begin());
  };

  ScalarField p(d);
  CgOptions cg{opt.rel_tol, cap_for(d, opt), true, "stokes-schur"};
  const CgResult res = solve_pcg(schur, identity, b.values(), p.values(), cg);
  remove_mean(p);

  VectorField u = inverse_vector_laplacian(rhs - grad(p));
  return {std::move(u), PressureField{std::move(p), true}, res.iterations};
}

VectorField leray_project(const VectorField& v, const SolveOptions& opt) {
  ScalarField g = div(v);
  g *= -1.0;
  // Zero by the discrete flux theorem; what is left is round-off, which can
  // dominate when v is already divergence-free.
  remove_mean(g);
  const ScalarField q = solve_neumann_poisson(g, opt);
  VectorField out = v - grad(q);
  out.enforce_no_slip();
  return out;
}

double norm_dual_star(const ScalarField& f, const SolveOptions& opt) {
  return norm_l2_vec(grad(solve_neumann_poisson(f, opt)));
}

double norm_dual_sharp(const VectorField& v, const SolveOptions& opt) {
  if (v.max_abs() == 0.0) return 0.0;
  return norm_grad_vec(solve_stokes(leray_project(v, opt), opt).u);
}

}  // namespace nlagg
