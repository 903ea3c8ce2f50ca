#pragma once

// Scalar numerics used by the closed-form metric evaluations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "doqos/errors.hpp"

namespace doqos {

/// Exponential integral E1(x) = \int_x^\infty e^{-t}/t dt for x > 0.
///
/// Power series for x <= 1, modified-Lentz continued fraction above. Results
/// are accurate to ~1e-13 absolute on [1e-8, 50]. Beyond x = 745 the value is
/// below the smallest subnormal double and 0 is returned.
inline double exp_integral_e1(double x) {
  constexpr double kSeriesCrossover = 1.0;
  constexpr double kUnderflow = 745.0;
  constexpr double kEps = 1e-16;
  constexpr int kMaxTerms = 500;

  if (!(x > 0.0)) {
    throw DomainError("exp_integral_e1: x must be > 0, got " + std::to_string(x));
  }
  if (x > kUnderflow) return 0.0;

  if (x <= kSeriesCrossover) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;  // (-x)^k / k!
    for (int k = 1; k <= kMaxTerms; ++k) {
      term *= -x / k;
      const double contrib = term / k;
      sum += contrib;
      if (std::abs(contrib) < kEps * std::abs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }

  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxTerms; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h * std::exp(-x);
}

struct RootBracket {
  double lo;
  double hi;
  double tol_abs = 1e-12;
  int max_iter = 200;
};

/// Bisection on a continuous function with a sign change across the bracket.
/// Deterministic; returns the midpoint of the final bracket.
template <typename F>
double find_root_monotone(F&& f, const RootBracket& bracket) {
  if (!(bracket.lo < bracket.hi) || !(bracket.tol_abs > 0.0) || bracket.max_iter < 1) {
    throw DomainError("find_root_monotone: invalid bracket");
  }
  double lo = bracket.lo;
  double hi = bracket.hi;
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw BracketError("find_root_monotone: f has the same sign at both ends", lo, hi);
  }
  for (int iter = 0; iter < bracket.max_iter; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (hi - lo <= bracket.tol_abs || mid <= lo || mid >= hi) return mid;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  if (hi - lo <= bracket.tol_abs) return lo + 0.5 * (hi - lo);
  throw ConvergenceError("find_root_monotone: max_iter exceeded", lo, hi);
}

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 1.0;
  double level = 0.95;

  bool contains(double p) const noexcept { return lo <= p && p <= hi; }
};

/// Wilson score interval for a binomial proportion.
inline ConfidenceInterval binomial_ci(std::uint64_t successes, std::uint64_t trials,
                                      double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw DomainError("binomial_ci: level must lie in (0,1)");
  }
  if (trials == 0 || successes > trials) {
    throw DomainError("binomial_ci: need 0 <= successes <= trials and trials >= 1");
  }
  const boost::math::normal_distribution<double> std_normal;
  const double z = boost::math::quantile(std_normal, 0.5 * (1.0 + level));
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double denom = 1.0 + z2n;
  const double center = (p + 0.5 * z2n) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n);

  ConfidenceInterval ci;
  ci.level = level;
  ci.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  ci.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  // Guard the rounding at the edges so the point estimate is always inside.
  ci.lo = std::min(ci.lo, p);
  ci.hi = std::max(ci.hi, p);
  return ci;
}

}  // namespace doqos
