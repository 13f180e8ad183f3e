#include "nlagg/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nlagg/error.hpp"

namespace nlagg {

namespace {

constexpr double kBracketGap = 1e-15;

double xlogx(double x) { return x == 0.0 ? 0.0 : x * std::log(x); }

void require_closed(double s) {
  if (!(std::abs(s) <= 1.0))
    throw Error(ErrorKind::OutOfDomain, "potential argument " + std::to_string(s) + " outside [-1,1]");
}

void require_open(const PotentialSpec& p, double s) {
  if (p.kind == PotentialKind::Logarithmic && !(std::abs(s) < 1.0))
    throw Error(ErrorKind::OutOfDomain, "potential argument " + std::to_string(s) + " outside (-1,1)");
}

// 1 - r^2 without cancellation near |r| = 1.
double one_minus_sq(double r) { return (1.0 - r) * (1.0 + r); }

// Resolvent of the logarithmic F' for s >= 0. g(r) = r + lambda*alpha*atanh(r) - s
// is increasing and convex on [0,1), so Newton started right of the root
// decreases monotonically onto it; bisection guards against round-off.
double log_resolvent_nonneg(double alpha, const YosidaParams& yp, double s) {
  const double la = yp.lambda * alpha;
  auto g = [&](double r) { return r + la * std::atanh(r) - s; };
  double lo = 0.0;
  double hi = 1.0 - kBracketGap;
  if (g(hi) <= 0.0) return hi;  // root closer to 1 than the bracket resolves
  double r = std::min(s, hi);
  const double tol = yp.newton_tol * std::max(1.0, s);
  for (int it = 0; it < yp.max_iters; ++it) {
    const double gr = g(r);
    if (std::abs(gr) <= tol) return r;
    if (gr > 0.0) hi = r; else lo = r;
    double next = r - gr / (1.0 + la / one_minus_sq(r));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == r || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
    r = next;
  }
  throw Error(ErrorKind::NoConvergence,
              "resolvent did not converge for s = " + std::to_string(s));
}

}  // namespace

double lambda_star_for(double w11) { return std::min(1.0 / (4.0 * (1.0 + 0.5 * w11)), 0.25); }

YosidaParams YosidaParams::make(double lambda, double kernel_w11_norm) {
  YosidaParams yp;
  yp.lambda = lambda;
  yp.lambda_star = lambda_star_for(kernel_w11_norm);
  NLAGG_REQUIRE(lambda > 0.0 && lambda <= yp.lambda_star, ErrorKind::InvalidArgument,
                "Yosida lambda " + std::to_string(lambda) + " must lie in (0, " +
                    std::to_string(yp.lambda_star) + "]");
  return yp;
}

double f_value(const PotentialSpec& p, double s) {
  require_closed(s);
  if (p.kind == PotentialKind::Quadratic) return 0.5 * p.alpha * s * s;
  return 0.5 * p.alpha * (xlogx(1.0 + s) + xlogx(1.0 - s));
}

double f_prime(const PotentialSpec& p, double s) {
  require_closed(s);
  require_open(p, s);
  if (p.kind == PotentialKind::Quadratic) return p.alpha * s;
  return p.alpha * std::atanh(s);
}

double f_double_prime(const PotentialSpec& p, double s) {
  require_closed(s);
  require_open(p, s);
  if (p.kind == PotentialKind::Quadratic) return p.alpha;
  return p.alpha / one_minus_sq(s);
}

double yosida_resolvent(const PotentialSpec& p, const YosidaParams& yp, double s) {
  NLAGG_REQUIRE(std::isfinite(s), ErrorKind::OutOfDomain, "resolvent argument is not finite");
  if (p.kind == PotentialKind::Quadratic) return s / (1.0 + yp.lambda * p.alpha);
  const double r = log_resolvent_nonneg(p.alpha, yp, std::abs(s));
  return s < 0.0 ? -r : r;
}

YosidaEval yosida_eval(const PotentialSpec& p, const YosidaParams& yp, double s) {
  const double r = yosida_resolvent(p, yp, s);
  if (p.kind == PotentialKind::Quadratic) {
    const double d = p.alpha / (1.0 + yp.lambda * p.alpha);
    return {r, d * s, d};
  }
  // atanh(r) loses eps/(1 - r^2) to the rounding of r, the quotient
  // (s - r)/lambda loses about eps/lambda; take whichever is smaller.
  const double fp = one_minus_sq(r) > yp.lambda ? p.alpha * std::atanh(r) : (s - r) / yp.lambda;
  const double fpp = p.alpha / (one_minus_sq(r) + yp.lambda * p.alpha);
  return {r, fp, fpp};
}

double yosida_f_prime(const PotentialSpec& p, const YosidaParams& yp, double s) {
  return yosida_eval(p, yp, s).f_prime;
}

double yosida_f(const PotentialSpec& p, const YosidaParams& yp, double s) {
  const YosidaEval e = yosida_eval(p, yp, s);
  return 0.5 * yp.lambda * e.f_prime * e.f_prime + f_value(p, e.resolvent);
}

YosidaDual yosida_dual(const PotentialSpec& p, const YosidaParams& yp, double m) {
  const double lam = yp.lambda;
  if (p.kind == PotentialKind::Quadratic) {
    const double c = (1.0 + lam * p.alpha) / p.alpha;
    return {0.5 * c * m * m, c * m, c};
  }
  const double x = m / p.alpha;
  const double ax = std::abs(x);
  const double log_cosh = ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
  const double th = std::tanh(x);
  return {p.alpha * log_cosh + 0.5 * lam * m * m, th + lam * m, (1.0 - th) * (1.0 + th) / p.alpha + lam};
}

// ------------------------------------------------------------ assumption checks

bool AssumptionReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

AssumptionReport check_entropy_assumptions(const PotentialSpec& p, int n_samples) {
  NLAGG_REQUIRE(n_samples >= 10, ErrorKind::InvalidArgument, "need at least 10 samples");
  AssumptionReport rep;

  {  // F'' >= alpha on (-1,1)
    double worst = INFINITY;
    for (int k = 0; k < n_samples; ++k) {
      const double s = -1.0 + 2.0 * (k + 0.5) / n_samples;
      worst = std::min(worst, f_double_prime(p, s) / p.alpha);
    }
    std::ostringstream d;
    d << "min F''/alpha = " << worst;
    rep.checks.push_back({"convexity", worst >= 1.0 - 1e-12, d.str()});
  }

  {  // |F'(+-(1 - 10^-k))| grows without bound: increments stay bounded below
    bool increasing = true;
    double first_inc = 0.0, last_inc = 0.0, prev = 0.0;
    for (int k = 1; k <= 12; ++k) {
      const double s = 1.0 - std::pow(10.0, -k);
      const double v = std::min(std::abs(f_prime(p, s)), std::abs(f_prime(p, -s)));
      if (k > 1) {
        const double inc = v - prev;
        if (!(inc > 0.0)) increasing = false;
        if (k == 2) first_inc = inc;
        last_inc = inc;
      }
      prev = v;
    }
    std::ostringstream d;
    d << "first increment " << first_inc << ", last increment " << last_inc;
    rep.checks.push_back(
        {"endpoint_blowup", increasing && first_inc > 0.0 && last_inc >= 0.5 * first_inc, d.str()});
  }

  {  // F'' non-decreasing on [1 - eps0, 1)
    constexpr double eps0 = 0.1;
    bool mono = true;
    double prev = f_double_prime(p, 1.0 - eps0);
    for (int k = 1; k < n_samples; ++k) {
      const double s = 1.0 - eps0 * std::pow(1e-10, static_cast<double>(k) / n_samples);
      const double v = f_double_prime(p, s);
      if (v < prev) mono = false;
      prev = v;
    }
    rep.checks.push_back({"second_derivative_monotone", mono, "sampled on [0.9, 1)"});
  }

  {  // F'' <= C exp(C |F'|^beta) with beta = 1: smallest C per sample, keep the max
    rep.growth_beta = 1.0;
    double c_needed = 0.0;
    for (int k = 0; k < n_samples; ++k) {
      const double s = 1.0 - std::pow(10.0, -12.0 * (k + 1) / n_samples);
      const double x = std::abs(f_prime(p, s));
      const double y = std::log(f_double_prime(p, s));
      double lo = 1e-12, hi = 1e12;
      for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        (std::log(mid) + mid * x >= y ? hi : lo) = mid;
      }
      c_needed = std::max(c_needed, hi);
    }
    rep.growth_c = c_needed;
    std::ostringstream d;
    d << "fitted C = " << c_needed << " with beta = 1";
    rep.checks.push_back({"growth_bound", c_needed < 1e6, d.str()});
  }
  return rep;
}

}  // namespace nlagg
