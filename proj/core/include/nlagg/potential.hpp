#pragma once

// Singular entropy density F on [-1,1] and its Yosida regularisation F_lambda.
//
//   F(s)      = (alpha/2) [ (1+s) ln(1+s) + (1-s) ln(1-s) ]
//   J_l       = (I + l F')^{-1}          (resolvent, maps R into (-1,1))
//   F'_l(s)   = (s - J_l(s)) / l = F'(J_l(s))
//   F_l(s)    = (l/2) |F'_l(s)|^2 + F(J_l(s))

#include <string>
#include <vector>

namespace nlagg {

enum class PotentialKind {
  Logarithmic,
  /// Smooth alpha/2 s^2; not a singular density. Kept as a negative control
  /// for the assumption checks.
  Quadratic,
};

struct PotentialSpec {
  double alpha = 1.0;
  PotentialKind kind = PotentialKind::Logarithmic;
};

struct YosidaParams {
  double lambda = 1e-4;
  double lambda_star = 0.25;
  double newton_tol = 1e-14;
  int max_iters = 100;

  /// lambda_star = min(1 / (4 (1 + ||J||_{W11} / 2)), 1/4); throws
  /// InvalidArgument unless 0 < lambda <= lambda_star.
  static YosidaParams make(double lambda, double kernel_w11_norm);
};

double lambda_star_for(double kernel_w11_norm);

/// F(s); OutOfDomain for |s| > 1.
double f_value(const PotentialSpec& p, double s);
/// F'(s); OutOfDomain for |s| >= 1 (logarithmic).
double f_prime(const PotentialSpec& p, double s);
/// F''(s); OutOfDomain for |s| >= 1 (logarithmic).
double f_double_prime(const PotentialSpec& p, double s);

/// r = J_lambda(s): the unique r in (-1,1) with r + lambda F'(r) = s.
double yosida_resolvent(const PotentialSpec& p, const YosidaParams& yp, double s);

struct YosidaEval {
  double resolvent;
  double f_prime;         // F'_lambda(s)
  double f_double_prime;  // F''_lambda(s) = F''(r) / (1 + lambda F''(r))
};

/// One resolvent solve, all first/second derivative information.
YosidaEval yosida_eval(const PotentialSpec& p, const YosidaParams& yp, double s);

double yosida_f_prime(const PotentialSpec& p, const YosidaParams& yp, double s);
double yosida_f(const PotentialSpec& p, const YosidaParams& yp, double s);

/// Convex conjugate side of F_lambda: psi = (F'_lambda)^{-1} and Psi with
/// Psi' = psi. For the logarithmic density psi(m) = tanh(m / alpha) + lambda m.
struct YosidaDual {
  double value;       // Psi(m)
  double inverse;     // psi(m)
  double derivative;  // psi'(m) = 1 / F''_lambda(psi(m))
};

YosidaDual yosida_dual(const PotentialSpec& p, const YosidaParams& yp, double m);

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  /// Empirical growth constants for F'' <= C exp(C |F'|^beta), fitted on the
  /// samples near the endpoints.
  double growth_c = 0.0;
  double growth_beta = 0.0;

  bool all_pass() const;
  const AssumptionCheck* find(const std::string& name) const;
};

/// Samples convexity (F'' >= alpha), blow-up of F' at the endpoints,
/// monotonicity of F'' near +1 and the exponential growth bound.
AssumptionReport check_entropy_assumptions(const PotentialSpec& p, int n_samples);

}  // namespace nlagg
