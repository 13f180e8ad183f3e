#pragma once

// Inverse operators behind the negative-order norms: the Neumann Laplacian
// inverse N and the no-slip Stokes inverse, plus the Leray projection.

#include <utility>

#include "nlagg/grid.hpp"

namespace nlagg {

enum class Preconditioner { Jacobi, Spectral };

struct SolveOptions {
  double rel_tol = 1e-10;
  int max_iter = 0;  // 0 -> 50 * max(nx, ny)
  Preconditioner preconditioner = Preconditioner::Spectral;
};

int default_iteration_cap(const Domain& d);

/// Returns the mean-zero f with laplace_neumann(f) = -g.
/// Throws NonZeroMean when |mean(g)| > 1e-10 * ||g||_inf.
ScalarField solve_neumann_poisson(const ScalarField& g, const SolveOptions& opt = {});

struct StokesSolution {
  VectorField u;
  PressureField p;
  int iterations = 0;
};

/// -Delta_h u + grad p = f, div u = 0, u = 0 on the walls, mean(p) = 0.
/// Pressure-Schur (Uzawa) conjugate gradients with exact transform-based
/// velocity solves.
StokesSolution solve_stokes(const VectorField& f, const SolveOptions& opt = {});

/// v - grad q with laplace_neumann(q) = div v.
VectorField leray_project(const VectorField& v, const SolveOptions& opt = {});

/// ||grad N f||_{L2}; requires mean-zero f.
double norm_dual_star(const ScalarField& f, const SolveOptions& opt = {});

/// ||grad A^{-1} P v||_{L2}.
double norm_dual_sharp(const VectorField& v, const SolveOptions& opt = {});

}  // namespace nlagg
