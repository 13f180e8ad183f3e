#pragma once

#include <functional>
#include <span>
#include <string>

namespace nlagg {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct CgOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  // 0: caller must set; solve_pcg throws on a zero cap
  /// Restrict iterates to the mean-zero subspace (singular Neumann systems).
  bool project_mean = false;
  std::string label = "cg";
};

struct CgResult {
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// map. `x` carries the initial guess in and the solution out. Throws
/// SolverDivergence if the iteration cap is reached before ||r|| <= tol*||b||.
CgResult solve_pcg(const LinearMap& apply, const LinearMap& precondition,
                   std::span<const double> b, std::span<double> x, const CgOptions& opt);

/// Jacobi preconditioner from a diagonal.
LinearMap jacobi(std::span<const double> diagonal);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace nlagg
