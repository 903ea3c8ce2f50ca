#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "doqos/mathcore.hpp"
#include "oracles.hpp"

namespace doqos {
namespace {

using testing::exp_integral_quadrature;

TEST(ExpIntegral, ReferenceValues) {
  EXPECT_NEAR(exp_integral_e1(1.0), 0.219383934396, 1e-11);
  EXPECT_NEAR(exp_integral_e1(10.0), 4.15697e-6, 1e-10);
  EXPECT_NEAR(exp_integral_e1(1e-8), -std::numbers::egamma - std::log(1e-8), 1e-3);
  EXPECT_NEAR(exp_integral_e1(1e-8), 17.8435, 1e-3);
}

TEST(ExpIntegral, MatchesQuadratureAcrossSeriesSeam) {
  for (double x : {0.01, 0.1, 0.5, 0.9, 0.999, 1.0, 1.001, 1.1, 2.0, 5.0, 10.0, 20.0, 40.0}) {
    const double ref = exp_integral_quadrature(1, x);
    EXPECT_NEAR(exp_integral_e1(x), ref, 1e-12) << "x=" << x;
  }
}

TEST(ExpIntegral, MatchesStdExpint) {
  // E1(x) = -Ei(-x)
  for (double x = 1e-8; x <= 50.0; x *= 1.7) {
    EXPECT_NEAR(exp_integral_e1(x), -std::expint(-x), 1e-12 * std::max(1.0, -std::expint(-x)))
        << "x=" << x;
  }
}

TEST(ExpIntegral, StrictlyDecreasingOnLogGrid) {
  double prev = exp_integral_e1(1e-8);
  for (double x = 1e-8 * 1.3; x <= 600.0; x *= 1.3) {
    const double v = exp_integral_e1(x);
    EXPECT_LT(v, prev) << "x=" << x;
    prev = v;
  }
}

TEST(ExpIntegral, RecurrenceAgainstQuadrature) {
  // E2(x) = e^{-x} - x E1(x); E2 by independent quadrature.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(0.01, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    const double e2 = exp_integral_quadrature(2, x);
    EXPECT_NEAR(std::exp(-x) - x * exp_integral_e1(x), e2, 1e-9) << "x=" << x;
  }
}

TEST(ExpIntegral, DomainAndUnderflow) {
  EXPECT_THROW(exp_integral_e1(0.0), DomainError);
  EXPECT_THROW(exp_integral_e1(-1.0), DomainError);
  EXPECT_THROW(exp_integral_e1(std::nan("")), DomainError);
  EXPECT_EQ(exp_integral_e1(800.0), 0.0);
  EXPECT_GT(exp_integral_e1(700.0), 0.0);
}

TEST(RootFinder, ReferenceRoots) {
  EXPECT_NEAR(find_root_monotone([](double x) { return x - 1.0; }, {0.0, 2.0, 1e-12}), 1.0,
              1e-12);
  EXPECT_NEAR(find_root_monotone([](double x) { return std::exp(-x) - 0.5; }, {0.0, 2.0, 1e-10}),
              std::numbers::ln2, 1e-10);
  EXPECT_NEAR(find_root_monotone([](double x) { return x * x - 2.0; }, {1.0, 2.0, 1e-10}),
              std::numbers::sqrt2, 1e-10);
}

TEST(RootFinder, Errors) {
  EXPECT_THROW(find_root_monotone([](double x) { return x * x + 1.0; }, {-1.0, 1.0, 1e-10}),
               BracketError);
  EXPECT_THROW(find_root_monotone([](double x) { return x; }, {1.0, 1.0, 1e-10}), DomainError);
  try {
    find_root_monotone([](double x) { return x - 0.3; }, {0.0, 1.0, 1e-12, 5});
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_LE(e.lo(), 0.3);
    EXPECT_GE(e.hi(), 0.3);
    EXPECT_NEAR(e.hi() - e.lo(), 1.0 / 32.0, 1e-15);
  }
}

TEST(RootFinder, ResultInsideBracketAndStableUnderTighterTolerance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> root_dist(-3.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double r = root_dist(rng);
    auto f = [r](double x) { return std::atan(x - r) + 0.1 * (x - r); };
    const RootBracket b{-4.0, 6.0, 1e-4};
    const double coarse = find_root_monotone(f, b);
    EXPECT_GE(coarse, b.lo);
    EXPECT_LE(coarse, b.hi);
    const double fine = find_root_monotone(f, RootBracket{-4.0, 6.0, 1e-10});
    EXPECT_LE(std::abs(fine - coarse), 1e-4);
  }
}

TEST(RootFinder, Deterministic) {
  auto f = [](double x) { return std::cos(x) - x; };
  EXPECT_EQ(find_root_monotone(f, {0.0, 1.0, 1e-14}), find_root_monotone(f, {0.0, 1.0, 1e-14}));
}

TEST(BinomialCi, ReferenceIntervals) {
  const auto zero = binomial_ci(0, 100, 0.95);
  EXPECT_EQ(zero.lo, 0.0);
  const auto half = binomial_ci(50, 100, 0.95);
  EXPECT_NEAR(half.lo, 0.4038, 1e-3);
  EXPECT_NEAR(half.hi, 0.5962, 1e-3);
  const auto full = binomial_ci(100, 100, 0.95);
  EXPECT_EQ(full.hi, 1.0);
}

TEST(BinomialCi, MatchesDirectWilsonFormula) {
  const double z99 = 2.5758293035489004;  // Phi^{-1}(0.995)
  for (std::uint64_t k : {1u, 7u, 259u, 600u, 999u}) {
    const auto ci = binomial_ci(k, 1000, 0.99);
    const auto ref = testing::wilson_direct(static_cast<double>(k), 1000.0, z99);
    EXPECT_NEAR(ci.lo, ref.lo, 1e-12);
    EXPECT_NEAR(ci.hi, ref.hi, 1e-12);
  }
}

TEST(BinomialCi, ContainsEstimateAndWidensWithLevel) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::uint64_t n = 1 + rng() % 5000;
    const std::uint64_t k = rng() % (n + 1);
    const double p = static_cast<double>(k) / static_cast<double>(n);
    double prev_width = -1.0;
    for (double level : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999}) {
      const auto ci = binomial_ci(k, n, level);
      EXPECT_TRUE(ci.contains(p));
      EXPECT_GE(ci.lo, 0.0);
      EXPECT_LE(ci.hi, 1.0);
      EXPECT_GE(ci.hi - ci.lo, prev_width);
      prev_width = ci.hi - ci.lo;
    }
  }
}

TEST(BinomialCi, Errors) {
  EXPECT_THROW(binomial_ci(1, 10, 0.0), DomainError);
  EXPECT_THROW(binomial_ci(1, 10, 1.0), DomainError);
  EXPECT_THROW(binomial_ci(11, 10, 0.9), DomainError);
  EXPECT_THROW(binomial_ci(0, 0, 0.9), DomainError);
}

}  // namespace
}  // namespace doqos
