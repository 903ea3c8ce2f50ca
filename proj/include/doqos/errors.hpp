#pragma once

#include <stdexcept>
#include <string>

namespace doqos {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation, or a violated
/// precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Root bracket whose endpoints do not straddle a sign change.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Iteration budget exhausted; carries the last bracket reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Combination of strategy and channel the analysis does not cover.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// CPA transmission requested at a gain below the truncation level.
class NotPermitted : public Error {
 public:
  using Error::Error;
};

/// Inverse solver found no feasible value; carries the saturated metric.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, double saturated_value)
      : Error(what), value_(saturated_value) {}
  double saturated_value() const noexcept { return value_; }

 private:
  double value_;
};

/// Invalid user configuration; names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace doqos
