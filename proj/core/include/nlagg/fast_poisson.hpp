#pragma once

// Direct solvers for the constant-coefficient operators of the MAC grid,
// diagonalised by real trigonometric transforms (FFTW r2r):
//   * cell-centred Neumann Laplacian      -> DCT-II in both directions
//   * x-face velocity, no-slip            -> DST-I in x, DST-II in y
//   * y-face velocity, no-slip            -> DST-II in x, DST-I in y
// Each solves (shift - Delta_h) x = b. With shift == 0 the Neumann solve
// returns the mean-zero solution and ignores the mean of b.

#include <memory>
#include <span>

#include "nlagg/grid.hpp"

namespace nlagg {

class FastPoisson {
public:
  enum class Layout { CellNeumann, XFaceDirichlet, YFaceDirichlet };

  FastPoisson(const Domain& d, Layout layout);
  ~FastPoisson();
  FastPoisson(const FastPoisson&) = delete;
  FastPoisson& operator=(const FastPoisson&) = delete;

  /// Solve in place. For face layouts the span covers all faces of the
  /// component (wall faces included); wall entries are ignored and zeroed.
  void solve(std::span<double> rhs_in_solution_out, double shift) const;

  const Domain& domain() const { return domain_; }

private:
  struct Impl;
  Domain domain_;
  Layout layout_;
  std::unique_ptr<Impl> impl_;
};

/// Thread-local cache of transform solvers keyed by domain and layout.
const FastPoisson& fast_poisson(const Domain& d, FastPoisson::Layout layout);

}  // namespace nlagg
