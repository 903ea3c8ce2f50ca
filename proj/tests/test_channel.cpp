#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "doqos/channel.hpp"
#include "doqos/mathcore.hpp"

namespace doqos {
namespace {

double empirical_cdf(const std::vector<double>& xs, double x) {
  return static_cast<double>(std::count_if(xs.begin(), xs.end(), [x](double v) { return v <= x; })) /
         static_cast<double>(xs.size());
}

TEST(SnrCdf, ReferenceValues) {
  EXPECT_EQ(snr_cdf(FadingSpec::with_avg_snr(10.0), 0.0), 0.0);
  EXPECT_NEAR(snr_cdf(FadingSpec::with_avg_snr(10.0), 10.0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_NEAR(snr_cdf(FadingSpec::with_avg_snr(10.0), 10.0), 0.632121, 1e-6);
  EXPECT_NEAR(snr_cdf(FadingSpec::with_avg_snr(100.0, 2), 4.65685), 0.0020703, 1e-6);
}

TEST(SnrCdf, SelectionCombiningIsPowerOfSingleBranch) {
  for (int l : {1, 2, 3, 5, 10, 15}) {
    for (double x : {0.0, 0.01, 0.3, 1.0, 4.0, 10.0, 55.0, 300.0}) {
      const double single = snr_cdf(FadingSpec::with_avg_snr(7.0, 1), x);
      EXPECT_EQ(snr_cdf(FadingSpec::with_avg_snr(7.0, l), x), std::pow(single, l));
    }
  }
}

TEST(SnrCdf, MonotoneBoundedAndLimits) {
  for (int l : {1, 4}) {
    const auto spec = FadingSpec::with_avg_snr(3.0, l);
    double prev = 0.0;
    for (double x = 0.0; x < 200.0; x += 0.37) {
      const double v = snr_cdf(spec, x);
      EXPECT_GE(v, prev);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      prev = v;
    }
    EXPECT_NEAR(snr_cdf(spec, 1e4), 1.0, 1e-15);
  }
}

TEST(SnrCdf, Preconditions) {
  EXPECT_THROW(snr_cdf(FadingSpec::with_avg_snr(10.0), -1.0), DomainError);
  EXPECT_THROW(snr_cdf(FadingSpec::with_avg_gain(0.1), 1.0), DomainError);
  EXPECT_THROW(snr_cdf(FadingSpec::with_avg_snr(10.0, 0), 1.0), DomainError);
  EXPECT_THROW(snr_cdf(FadingSpec::with_avg_snr(-1.0), 1.0), DomainError);
}

TEST(SampleSnr, EmpiricalCdfMatchesClosedForm) {
  for (int l : {1, 3}) {
    const auto spec = FadingSpec::with_avg_snr(10.0, l);
    const auto draws = sample_snr(spec, 42 + l, 1'000'000);
    for (double x : {1.0, 5.0, 10.0, 20.0, 40.0}) {
      const double closed = snr_cdf(spec, x);
      const auto hits = static_cast<std::uint64_t>(std::llround(empirical_cdf(draws, x) * 1e6));
      const auto ci = binomial_ci(hits, 1'000'000, 0.99);
      EXPECT_TRUE(ci.contains(closed)) << "L=" << l << " x=" << x << " closed=" << closed
                                       << " ci=[" << ci.lo << "," << ci.hi << "]";
    }
  }
}

TEST(SampleSnr, ReproducibleAndValidated) {
  const auto spec = FadingSpec::with_avg_snr(10.0, 2);
  EXPECT_EQ(sample_snr(spec, 9, 1000), sample_snr(spec, 9, 1000));
  EXPECT_NE(sample_snr(spec, 9, 1000), sample_snr(spec, 10, 1000));
  EXPECT_THROW(sample_snr(spec, 9, 0), DomainError);
}

TEST(GainCdf, ReferenceValuesAndErrors) {
  const auto spec = FadingSpec::with_avg_gain(0.1);
  EXPECT_EQ(gain_cdf(spec, 0.0), 0.0);
  EXPECT_NEAR(gain_cdf(spec, 0.2), 0.864665, 1e-6);
  EXPECT_NEAR(gain_cdf(spec, 0.1), 0.632121, 1e-6);
  auto diversity = spec;
  diversity.diversity_order = 2;
  EXPECT_THROW(gain_cdf(diversity, 0.1), UnsupportedConfiguration);
  EXPECT_THROW(gain_cdf(spec, -0.1), DomainError);
}

TEST(DopplerSpec, Invariants) {
  EXPECT_NO_THROW(DopplerSpec::for_doppler(50.0).validate());
  auto d = DopplerSpec::for_doppler(50.0);
  d.sample_dt_s = 1.0 / (16.0 * 50.0);
  EXPECT_NO_THROW(d.validate());
  d.sample_dt_s = 1.0 / (8.0 * 50.0);
  EXPECT_THROW(d.validate(), DomainError);
  d = DopplerSpec::for_doppler(50.0);
  d.num_sinusoids = 7;
  EXPECT_THROW(d.validate(), DomainError);
  d = DopplerSpec::for_doppler(50.0);
  EXPECT_THROW(sample_gain_process(d, 0.1, 5.0 * d.sample_dt_s), DomainError);
}

TEST(GainProcess, MeanAndMarginal) {
  const auto d = DopplerSpec::for_doppler(50.0, 3);
  const auto trace = sample_gain_process(d, 0.1, 100.0);
  ASSERT_EQ(trace.gains.size(), 160001u);
  double sum = 0.0;
  for (double g : trace.gains) {
    EXPECT_GE(g, 0.0);
    sum += g;
  }
  EXPECT_NEAR(sum / static_cast<double>(trace.gains.size()), 0.1, 0.01);
  EXPECT_NEAR(empirical_cdf(trace.gains, 0.1), 1.0 - std::exp(-1.0), 0.02);
}

TEST(GainProcess, ReproducibleUnderFixedSeed) {
  const auto d = DopplerSpec::for_doppler(50.0, 77);
  const auto a = sample_gain_process(d, 0.1, 3.0);
  const auto b = sample_gain_process(d, 0.1, 3.0);
  EXPECT_EQ(a.gains, b.gains);
  auto other = d;
  other.seed = 78;
  EXPECT_NE(a.gains, sample_gain_process(other, 0.1, 3.0).gains);
}

TEST(GainProcess, RecurrenceTracksDirectEvaluation) {
  const auto d = DopplerSpec::for_doppler(50.0, 5);
  SosFadingProcess stepped(d, 0.1);
  const SosFadingProcess direct(d, 0.1);
  for (int i = 0; i < 5000; ++i) {
    const double t = i * d.sample_dt_s;
    EXPECT_NEAR(stepped.next(), direct.gain_at(t), 1e-11) << "i=" << i;
  }
}

TEST(GainProcess, DecimatedMarginalIsExponential) {
  // 10^6 samples spaced 2/fd apart; Kolmogorov-Smirnov distance to Exp(mean 0.1).
  const auto d = DopplerSpec::for_doppler(50.0, 11);
  const SosFadingProcess process(d, 0.1);
  const std::size_t n = 1'000'000;
  const double spacing = 2.0 / d.doppler_hz;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = process.gain_at(static_cast<double>(i) * spacing);
  std::sort(g.begin(), g.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = -std::expm1(-g[i] / 0.1);
    ks = std::max({ks, std::abs(f - static_cast<double>(i) / n),
                   std::abs(f - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(GainProcess, AutocorrelationFollowsBesselProfile) {
  const auto d = DopplerSpec::for_doppler(50.0, 21);
  SosFadingProcess process(d, 1.0);
  const std::size_t n = 200'000;
  std::vector<std::complex<double>> h(n);
  for (auto& v : h) v = process.next_envelope();
  const std::size_t max_lag = 64;  // tau fd = 2
  double power = 0.0;
  for (std::size_t i = 0; i + max_lag < n; ++i) power += std::norm(h[i]);
  for (std::size_t lag = 0; lag <= max_lag; lag += 4) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i + max_lag < n; ++i) acc += h[i] * std::conj(h[i + lag]);
    const double r = acc.real() / power;
    const double tau = static_cast<double>(lag) * d.sample_dt_s;
    const double ref = std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * d.doppler_hz * tau);
    if (lag == 0) EXPECT_NEAR(r, 1.0, 1e-12);
    EXPECT_NEAR(r, ref, 0.05) << "lag=" << lag;
  }
}

TEST(FirstPassage, ZeroExactlyWhenFirstSampleQualifies) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto d = DopplerSpec::for_doppler(50.0, s);
    const double first = SosFadingProcess(d, 0.1).next();
    const auto fp = first_passage_time(d, 0.1, 0.2);
    EXPECT_FALSE(fp.censored);
    EXPECT_EQ(fp.seconds == 0.0, first >= 0.2) << "seed " << s;
    // Crossing sample really is the first one at or above the level.
    SosFadingProcess p(d, 0.1);
    const auto idx = static_cast<std::size_t>(std::llround(fp.seconds / d.sample_dt_s));
    for (std::size_t i = 0; i < idx; ++i) EXPECT_LT(p.next(), 0.2);
    EXPECT_GE(p.next(), 0.2);
  }
}

TEST(FirstPassage, StationaryStartAndMeanFadeDuration) {
  const std::uint64_t n = 100000;
  std::uint64_t zeros = 0;
  std::uint64_t positive = 0;
  double positive_sum = 0.0;
  for (std::uint64_t s = 0; s < n; ++s) {
    const auto fp = first_passage_time(DopplerSpec::for_doppler(50.0, derive_seed(99, s)), 0.1, 0.2);
    ASSERT_FALSE(fp.censored);
    if (fp.seconds == 0.0) {
      ++zeros;
    } else {
      ++positive;
      positive_sum += fp.seconds;
    }
  }
  EXPECT_TRUE(binomial_ci(zeros, n, 0.99).contains(std::exp(-2.0)))
      << static_cast<double>(zeros) / n;
  const double afd_oracle =
      (std::exp(2.0) - 1.0) / (std::sqrt(2.0) * 50.0 * std::sqrt(2.0 * std::numbers::pi));
  EXPECT_NEAR(afd_oracle, 0.0360, 1e-4);
  EXPECT_NEAR(positive_sum / static_cast<double>(positive), afd_oracle, 0.2 * afd_oracle);
}

TEST(FirstPassage, CensoredAtCap) {
  // Level far above the mean with a tiny cap: almost surely no crossing.
  const auto d = DopplerSpec::for_doppler(50.0, 1);
  const auto fp = first_passage_time(d, 0.1, 5.0, 0.01);
  EXPECT_TRUE(fp.censored);
  EXPECT_EQ(fp.seconds, 0.01);
  EXPECT_DOUBLE_EQ(default_passage_cap(d), 20.0);
  EXPECT_THROW(first_passage_time(d, 0.1, 0.0), DomainError);
}

TEST(LevelCrossing, AverageFadeDurationReference) {
  EXPECT_NEAR(average_fade_duration(0.1, 0.2, 50.0), 0.036047, 1e-6);
  // LCR x AFD = P(gain < level)
  const double lcr = level_crossing_rate(0.1, 0.2, 50.0);
  EXPECT_NEAR(lcr * average_fade_duration(0.1, 0.2, 50.0), 1.0 - std::exp(-2.0), 1e-12);
}

TEST(GainTraceCsv, HeaderAndRows) {
  GainTrace t{0.5, {0.25, 1.0}};
  std::ostringstream os;
  write_gain_trace_csv(os, t);
  EXPECT_EQ(os.str(), "t_s,gain\n0,0.25\n0.5,1\n");
}

}  // namespace
}  // namespace doqos
