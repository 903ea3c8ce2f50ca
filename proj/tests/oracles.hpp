#pragma once

// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library's evaluation paths.

#include <cmath>
#include <functional>
#include <numbers>

namespace doqos::testing {

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f on [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13, int max_depth = 60) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Integral of f over [a, b] split into n equal panels (keeps each panel smooth).
inline double integrate_panels(const std::function<double(double)>& f, double a, double b,
                               int n, double tol = 1e-14) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double lo = a + (b - a) * i / n;
    const double hi = a + (b - a) * (i + 1) / n;
    sum += integrate(f, lo, hi, tol / n);
  }
  return sum;
}

/// E_n(x) = \int_0^1 u^{n-2} e^{-x/u} du (substitution t = 1/u), by quadrature.
inline double exp_integral_quadrature(int n, double x) {
  auto f = [n, x](double u) { return u <= 0.0 ? 0.0 : std::pow(u, n - 2) * std::exp(-x / u); };
  return integrate_panels(f, 0.0, 1.0, 64);
}

/// Wilson score interval evaluated straight from the textbook formula.
struct WilsonBounds {
  double lo, hi;
};
inline WilsonBounds wilson_direct(double k, double n, double z) {
  const double p = k / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {center - half, center + half};
}

/// Rayleigh SNR density with mean avg.
inline double exponential_pdf(double x, double avg) { return std::exp(-x / avg) / avg; }

}  // namespace doqos::testing
