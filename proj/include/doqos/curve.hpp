#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "doqos/errors.hpp"
#include "doqos/mathcore.hpp"

namespace doqos {

enum class Method { ClosedForm, MonteCarlo };

inline const char* to_string(Method m) {
  return m == Method::ClosedForm ? "closed-form" : "monte-carlo";
}

/// Outage curves (DOR/EOR) are tail probabilities and never increase along
/// the threshold axis; CDF curves never decrease.
enum class CurveShape { Tail, Cdf };

struct CurvePoint {
  double threshold = 0.0;
  double value = 0.0;
  Method method = Method::ClosedForm;
  std::optional<ConfidenceInterval> ci;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::string flags;
};

/// Fewer successes than this marks a Monte Carlo point low-confidence.
inline constexpr std::uint64_t kLowConfidenceSuccesses = 20;

inline const char* low_confidence_flag(std::uint64_t successes) {
  return successes < kLowConfidenceSuccesses ? "low-confidence" : "";
}

struct Curve {
  std::string label;
  std::string threshold_unit;
  CurveShape shape = CurveShape::Tail;
  Method method = Method::ClosedForm;
  std::vector<CurvePoint> points;
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Checks the curve invariants; throws DomainError on violation.
  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!(p.value >= 0.0 && p.value <= 1.0)) {
        throw DomainError("Curve '" + label + "': value outside [0,1]");
      }
      if (i == 0) continue;
      const auto& prev = points[i - 1];
      if (!(p.threshold > prev.threshold)) {
        throw DomainError("Curve '" + label + "': thresholds not strictly increasing");
      }
      const bool ordered = shape == CurveShape::Tail ? p.value <= prev.value : p.value >= prev.value;
      if (!ordered) throw DomainError("Curve '" + label + "': values not monotone");
    }
  }

  /// Right-continuous step evaluation: value of the last point at or before t.
  /// Before the first point a CDF is 0 and a tail probability is 1.
  double value_at(double t) const {
    double v = shape == CurveShape::Cdf ? 0.0 : 1.0;
    for (const auto& p : points) {
      if (p.threshold > t) break;
      v = p.value;
    }
    return v;
  }
};

/// Strictly increasing grid check shared by solvers and the CLI.
inline void require_increasing_grid(const std::vector<double>& grid, const std::string& field) {
  if (grid.empty()) throw ConfigError(field, "threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !(grid[i] >= 0.0)) {
      throw ConfigError(field, "grid values must be finite and >= 0");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ConfigError(field, "grid must be strictly increasing");
    }
  }
}

/// n points log-spaced from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw DomainError("log_grid: need 0 < lo < hi, n >= 2");
  std::vector<double> g(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

/// n points evenly spaced from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo) || n < 2) throw DomainError("linear_grid: need lo < hi, n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  g.back() = hi;
  return g;
}

}  // namespace doqos
