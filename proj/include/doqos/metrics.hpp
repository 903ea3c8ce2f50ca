#pragma once

// Data-oriented session metrics over slow fading:
//   MTT - minimum time to deliver H bits on one channel realization
//   DOR - P(MTT > delay threshold)
//   MEC - minimum energy to deliver H bits with CPA
//   EOR - P(MEC > energy threshold), gain conditioned on CPA being permitted
// Each probability has a closed-form evaluation and a seeded Monte Carlo
// estimator, plus waiting/delivery-time distributions for CPA and inverse
// solvers for diversity order and average SNR.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "doqos/channel.hpp"
#include "doqos/curve.hpp"
#include "doqos/errors.hpp"
#include "doqos/mathcore.hpp"
#include "doqos/parallel.hpp"
#include "doqos/random.hpp"
#include "doqos/strategy.hpp"

namespace doqos {

/// Finite non-negative duration, or "never" for a suspended transmission.
/// never orders after every finite duration.
class DurationOrNever {
 public:
  static DurationOrNever never() { return DurationOrNever(); }
  static DurationOrNever finite(double seconds) {
    if (!(seconds >= 0.0) || std::isinf(seconds)) {
      throw DomainError("DurationOrNever: seconds must be finite and >= 0");
    }
    return DurationOrNever(seconds);
  }

  bool is_never() const noexcept { return !seconds_.has_value(); }
  double seconds() const {
    if (!seconds_) throw DomainError("DurationOrNever: duration is never");
    return *seconds_;
  }

  std::partial_ordering operator<=>(const DurationOrNever& o) const {
    if (is_never() || o.is_never()) {
      return static_cast<int>(is_never()) <=> static_cast<int>(o.is_never());
    }
    return *seconds_ <=> *o.seconds_;
  }
  bool operator==(const DurationOrNever& o) const = default;

  /// True when this duration exceeds a finite threshold.
  bool exceeds(double threshold_s) const { return is_never() || *seconds_ > threshold_s; }

 private:
  DurationOrNever() = default;
  explicit DurationOrNever(double s) : seconds_(s) {}
  std::optional<double> seconds_;
};

struct SessionSpec {
  double data_bits = 0.0;
  std::optional<double> delay_threshold_s;
  std::optional<double> energy_threshold_j;

  void validate() const {
    if (!(data_bits >= 0.0) || !std::isfinite(data_bits)) {
      throw DomainError("SessionSpec: data_bits must be finite and >= 0");
    }
    if (delay_threshold_s && !(*delay_threshold_s > 0.0)) {
      throw DomainError("SessionSpec: delay_threshold_s must be > 0");
    }
    if (energy_threshold_j && !(*energy_threshold_j > 0.0)) {
      throw DomainError("SessionSpec: energy_threshold_j must be > 0");
    }
  }
};

struct MonteCarloConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  double ci_level = 0.99;
  unsigned workers = 0;  // 0: hardware concurrency; never affects results

  void validate() const {
    if (trials < 1) throw DomainError("MonteCarloConfig: trials must be >= 1");
    if (!(ci_level > 0.0 && ci_level < 1.0)) {
      throw DomainError("MonteCarloConfig: ci_level must lie in (0,1)");
    }
  }
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  ConfidenceInterval ci;
  std::uint64_t seed = 0;

  bool low_confidence() const noexcept { return successes < kLowConfidenceSuccesses; }
};

namespace detail {

inline constexpr std::uint64_t kTrialsPerChunk = 1 << 16;

inline MonteCarloEstimate make_estimate(std::uint64_t successes, const MonteCarloConfig& mc) {
  MonteCarloEstimate e;
  e.successes = successes;
  e.trials = mc.trials;
  e.estimate = static_cast<double>(successes) / static_cast<double>(mc.trials);
  e.ci = binomial_ci(successes, mc.trials, mc.ci_level);
  e.seed = mc.seed;
  return e;
}

/// Counts trials for which hit(stream) is true, chunked with per-chunk seeds.
template <typename Hit>
std::uint64_t count_hits(const MonteCarloConfig& mc, Hit&& hit) {
  const auto counts = run_chunks<std::uint64_t>(
      mc.trials, kTrialsPerChunk, mc.workers,
      [&](std::uint64_t chunk, std::uint64_t, std::uint64_t count) {
        Stream rng(mc.seed, chunk);
        std::uint64_t hits = 0;
        for (std::uint64_t i = 0; i < count; ++i) hits += hit(rng) ? 1 : 0;
        return hits;
      });
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

inline void require_nonnegative_bits(double data_bits) {
  if (!(data_bits >= 0.0) || !std::isfinite(data_bits)) {
    throw DomainError("data_bits must be finite and >= 0");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MTT / DOR

/// Delivery time of H bits at one SNR realization. Slow fading: one SNR for
/// the whole session. CPA is gain-driven; see cpa_transmission_time.
inline DurationOrNever mtt(const StrategyParams& strategy, double snr, double bandwidth_hz,
                           double data_bits) {
  detail::require_nonnegative_bits(data_bits);
  if (data_bits == 0.0) return DurationOrNever::finite(0.0);
  const double rate = std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, CraStrategy>) {
          return cra_rate(snr, bandwidth_hz);
        } else if constexpr (std::is_same_v<S, OpraParams>) {
          return opra_rate(snr, s, bandwidth_hz);
        } else if constexpr (std::is_same_v<S, AmcStrategy>) {
          return amc_rate(s.scheme, s.traffic_class, snr, bandwidth_hz);
        } else {
          throw UnsupportedConfiguration("mtt: CPA delivery time is not an SNR function");
        }
      },
      strategy);
  if (rate <= 0.0) return DurationOrNever::never();
  return DurationOrNever::finite(data_bits / rate);
}

/// Spectral-efficiency load c = H / (W T), bits/s/Hz.
inline double spectral_load(double data_bits, double bandwidth_hz, double delay_threshold_s) {
  return data_bits / (bandwidth_hz * delay_threshold_s);
}

/// Closed-form DOR for CRA (any L) and OPRA (L = 1):
///   CRA  F(2^c - 1),  OPRA  F(cutoff 2^c),
/// with F the post-combining SNR CDF. An SNR threshold beyond the double range
/// saturates the result to exactly 1.
inline double dor_closed_form(const StrategyParams& strategy, const FadingSpec& channel,
                              double data_bits, double delay_threshold_s) {
  channel.require_avg_snr();
  detail::require_nonnegative_bits(data_bits);
  if (!(delay_threshold_s > 0.0)) throw DomainError("dor_closed_form: threshold must be > 0");
  if (data_bits == 0.0) return 0.0;
  const double c = spectral_load(data_bits, channel.bandwidth_hz, delay_threshold_s);

  double snr_needed = 0.0;
  if (std::holds_alternative<CraStrategy>(strategy)) {
    snr_needed = std::expm1(c * std::numbers::ln2);
  } else if (const auto* opra = std::get_if<OpraParams>(&strategy)) {
    if (channel.diversity_order != 1) {
      throw UnsupportedConfiguration("dor_closed_form: OPRA requires a single branch");
    }
    snr_needed = opra->cutoff_snr * std::exp2(c);
  } else {
    throw UnsupportedConfiguration("dor_closed_form: only CRA and OPRA have closed forms");
  }
  if (!std::isfinite(snr_needed)) return 1.0;
  return snr_cdf(channel, snr_needed);
}

inline MonteCarloEstimate dor_monte_carlo(const StrategyParams& strategy,
                                          const FadingSpec& channel, double data_bits,
                                          double delay_threshold_s, const MonteCarloConfig& mc) {
  const double avg = channel.require_avg_snr();
  mc.validate();
  detail::require_nonnegative_bits(data_bits);
  if (!(delay_threshold_s > 0.0)) throw DomainError("dor_monte_carlo: threshold must be > 0");
  if (std::holds_alternative<CpaParams>(strategy)) {
    throw UnsupportedConfiguration("dor_monte_carlo: CPA delay is handled by the waiting-time CDF");
  }
  const int branches = channel.diversity_order;
  const double bandwidth = channel.bandwidth_hz;
  const auto hits = detail::count_hits(mc, [&](Stream& rng) {
    double snr = 0.0;
    for (int b = 0; b < branches; ++b) snr = std::max(snr, rng.exponential(avg));
    return mtt(strategy, snr, bandwidth, data_bits).exceeds(delay_threshold_s);
  });
  return detail::make_estimate(hits, mc);
}

/// Probability that the strategy does not transmit on a realization:
/// OPRA F(cutoff); CPA P(gain < g_min).
inline double prob_no_transmission(const StrategyParams& strategy, const FadingSpec& channel) {
  if (const auto* opra = std::get_if<OpraParams>(&strategy)) {
    if (channel.diversity_order != 1) {
      throw UnsupportedConfiguration("prob_no_transmission: OPRA requires a single branch");
    }
    return snr_cdf(channel, opra->cutoff_snr);
  }
  if (const auto* cpa = std::get_if<CpaParams>(&strategy)) {
    return gain_cdf(channel, cpa_min_gain(*cpa, channel.noise_psd, channel.bandwidth_hz));
  }
  throw UnsupportedConfiguration("prob_no_transmission: defined for OPRA and CPA only");
}

// ---------------------------------------------------------------------------
// MEC / EOR

/// (P_tx(gain) + P_c) T_tx; requires gain >= g_min.
inline double mec(const CpaParams& cpa, double gain, double noise_psd, double bandwidth_hz,
                  double data_bits) {
  detail::require_nonnegative_bits(data_bits);
  if (data_bits == 0.0) return 0.0;
  const double g_min = cpa_min_gain(cpa, noise_psd, bandwidth_hz);
  if (!(gain >= g_min)) {
    throw NotPermitted("mec: gain below the CPA truncation level; transmission must wait");
  }
  const double t_tx = cpa_transmission_time(cpa, bandwidth_hz, data_bits);
  return (cpa_transmit_power(gain, cpa, noise_psd, bandwidth_hz) + cpa.circuit_power_w) * t_tx;
}

/// Largest session energy CPA can spend: MEC at gain = g_min.
inline double cpa_peak_energy(const CpaParams& cpa, double bandwidth_hz, double data_bits) {
  return (cpa.peak_power_w + cpa.circuit_power_w) *
         cpa_transmission_time(cpa, bandwidth_hz, data_bits);
}

/// Closed-form EOR under the transmission-conditioned gain law
/// g | g >= g_min (truncated exponential):
///   EOR = 1 - exp(-(g_E - g_min)/avg) for g_E > g_min, else 0,
/// where g_E = target N0 W T_tx / (E_th - P_c T_tx) is the gain at which MEC
/// equals E_th. E_th at or below the circuit-energy floor P_c T_tx gives 1.
inline double eor_closed_form(const CpaParams& cpa, const FadingSpec& channel, double data_bits,
                              double energy_threshold_j) {
  const double avg = channel.require_avg_gain();
  cpa.validate();
  if (channel.diversity_order != 1) {
    throw UnsupportedConfiguration("eor_closed_form: CPA analysis is single-branch");
  }
  detail::require_nonnegative_bits(data_bits);
  if (!(energy_threshold_j > 0.0)) throw DomainError("eor_closed_form: E_th must be > 0");
  if (data_bits == 0.0) return 0.0;

  const double t_tx = cpa_transmission_time(cpa, channel.bandwidth_hz, data_bits);
  const double floor = cpa.circuit_power_w * t_tx;
  if (energy_threshold_j <= floor) return 1.0;
  const double g_min = cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz);
  const double g_e = cpa.target_snr * channel.noise_psd * channel.bandwidth_hz * t_tx /
                     (energy_threshold_j - floor);
  if (g_e <= g_min) return 0.0;
  return -std::expm1(-(g_e - g_min) / avg);
}

/// Monte Carlo EOR. Gains are drawn from g_min + Exp(avg) (the conditioned
/// law); each trial compares per-bit energy against E_th / H, so (H, E_th) and
/// (1, E_th / H) make identical decisions.
inline MonteCarloEstimate eor_monte_carlo(const CpaParams& cpa, const FadingSpec& channel,
                                          double data_bits, double energy_threshold_j,
                                          const MonteCarloConfig& mc) {
  const double avg = channel.require_avg_gain();
  cpa.validate();
  mc.validate();
  if (channel.diversity_order != 1) {
    throw UnsupportedConfiguration("eor_monte_carlo: CPA analysis is single-branch");
  }
  detail::require_nonnegative_bits(data_bits);
  if (!(energy_threshold_j > 0.0)) throw DomainError("eor_monte_carlo: E_th must be > 0");
  if (data_bits == 0.0) return detail::make_estimate(0, mc);

  const double g_min = cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz);
  const double per_bit_threshold = energy_threshold_j / data_bits;
  const double bit_time = cpa_transmission_time(cpa, channel.bandwidth_hz, 1.0);
  const double noise = channel.noise_psd;
  const double bandwidth = channel.bandwidth_hz;
  const auto hits = detail::count_hits(mc, [&](Stream& rng) {
    const double g = g_min + rng.exponential(avg);
    const double per_bit =
        (cpa_transmit_power(g, cpa, noise, bandwidth) + cpa.circuit_power_w) * bit_time;
    return per_bit > per_bit_threshold;
  });
  return detail::make_estimate(hits, mc);
}

// ---------------------------------------------------------------------------
// Whole curves over a threshold grid

namespace detail {

/// Tail curve from per-trial outcomes: point k counts outcomes > grid[k] / grid_divisor.
/// Every point shares the same samples, so the curve is exactly monotone.
inline Curve tail_curve_from_samples(std::vector<double> outcomes, const std::vector<double>& grid,
                                     double grid_divisor, const MonteCarloConfig& mc) {
  std::sort(outcomes.begin(), outcomes.end());
  Curve curve;
  curve.shape = CurveShape::Tail;
  curve.method = Method::MonteCarlo;
  for (double t : grid) {
    const auto below = std::upper_bound(outcomes.begin(), outcomes.end(), t / grid_divisor);
    const auto hits = static_cast<std::uint64_t>(outcomes.end() - below);
    const auto e = make_estimate(hits, mc);
    CurvePoint p;
    p.threshold = t;
    p.value = e.estimate;
    p.method = Method::MonteCarlo;
    p.ci = e.ci;
    p.successes = hits;
    p.trials = mc.trials;
    p.flags = low_confidence_flag(hits);
    curve.points.push_back(std::move(p));
  }
  return curve;
}

template <typename Draw>
std::vector<double> draw_outcomes(const MonteCarloConfig& mc, Draw&& draw) {
  const auto chunks = run_chunks<std::vector<double>>(
      mc.trials, kTrialsPerChunk, mc.workers,
      [&](std::uint64_t chunk, std::uint64_t, std::uint64_t count) {
        Stream rng(mc.seed, chunk);
        std::vector<double> out(count);
        for (auto& v : out) v = draw(rng);
        return out;
      });
  std::vector<double> all;
  all.reserve(mc.trials);
  for (const auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  return all;
}

}  // namespace detail

inline Curve dor_curve_closed_form(const StrategyParams& strategy, const FadingSpec& channel,
                                   double data_bits, const std::vector<double>& t_grid) {
  require_increasing_grid(t_grid, "t_grid");
  Curve curve;
  curve.threshold_unit = "s";
  curve.shape = CurveShape::Tail;
  curve.method = Method::ClosedForm;
  for (double t : t_grid) {
    CurvePoint p;
    p.threshold = t;
    p.value = dor_closed_form(strategy, channel, data_bits, t);
    curve.points.push_back(p);
  }
  return curve;
}

/// Monte Carlo DOR over a grid. Point k equals
/// dor_monte_carlo(strategy, channel, data_bits, t_grid[k], mc) exactly.
inline Curve dor_curve_monte_carlo(const StrategyParams& strategy, const FadingSpec& channel,
                                   double data_bits, const std::vector<double>& t_grid,
                                   const MonteCarloConfig& mc) {
  const double avg = channel.require_avg_snr();
  mc.validate();
  detail::require_nonnegative_bits(data_bits);
  require_increasing_grid(t_grid, "t_grid");
  if (t_grid.front() <= 0.0) throw DomainError("dor_curve_monte_carlo: thresholds must be > 0");
  if (std::holds_alternative<CpaParams>(strategy)) {
    throw UnsupportedConfiguration("dor_curve_monte_carlo: CPA delay is handled by the waiting-time CDF");
  }
  const int branches = channel.diversity_order;
  const double bandwidth = channel.bandwidth_hz;
  auto outcomes = detail::draw_outcomes(mc, [&](Stream& rng) {
    double snr = 0.0;
    for (int b = 0; b < branches; ++b) snr = std::max(snr, rng.exponential(avg));
    const auto d = mtt(strategy, snr, bandwidth, data_bits);
    return d.is_never() ? std::numeric_limits<double>::infinity() : d.seconds();
  });
  Curve curve = detail::tail_curve_from_samples(std::move(outcomes), t_grid, 1.0, mc);
  curve.threshold_unit = "s";
  return curve;
}

inline Curve eor_curve_closed_form(const CpaParams& cpa, const FadingSpec& channel,
                                   double data_bits, const std::vector<double>& e_grid) {
  require_increasing_grid(e_grid, "e_grid");
  Curve curve;
  curve.threshold_unit = "J";
  curve.shape = CurveShape::Tail;
  curve.method = Method::ClosedForm;
  for (double e : e_grid) {
    CurvePoint p;
    p.threshold = e;
    p.value = eor_closed_form(cpa, channel, data_bits, e);
    curve.points.push_back(p);
  }
  return curve;
}

/// Monte Carlo EOR over a grid. Point k equals
/// eor_monte_carlo(cpa, channel, data_bits, e_grid[k], mc) exactly.
inline Curve eor_curve_monte_carlo(const CpaParams& cpa, const FadingSpec& channel,
                                   double data_bits, const std::vector<double>& e_grid,
                                   const MonteCarloConfig& mc) {
  const double avg = channel.require_avg_gain();
  cpa.validate();
  mc.validate();
  if (channel.diversity_order != 1) {
    throw UnsupportedConfiguration("eor_curve_monte_carlo: CPA analysis is single-branch");
  }
  detail::require_nonnegative_bits(data_bits);
  require_increasing_grid(e_grid, "e_grid");
  if (e_grid.front() <= 0.0) throw DomainError("eor_curve_monte_carlo: E_th must be > 0");
  const double g_min = cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz);
  const double bit_time = cpa_transmission_time(cpa, channel.bandwidth_hz, 1.0);
  const double noise = channel.noise_psd;
  const double bandwidth = channel.bandwidth_hz;
  std::vector<double> per_bit;
  if (data_bits > 0.0) {
    per_bit = detail::draw_outcomes(mc, [&](Stream& rng) {
      const double g = g_min + rng.exponential(avg);
      return (cpa_transmit_power(g, cpa, noise, bandwidth) + cpa.circuit_power_w) * bit_time;
    });
  }
  // Compare per-bit energy against E_th / H, as eor_monte_carlo does.
  Curve curve = detail::tail_curve_from_samples(std::move(per_bit), e_grid,
                                                data_bits > 0.0 ? data_bits : 1.0, mc);
  curve.threshold_unit = "J";
  return curve;
}

// ---------------------------------------------------------------------------
// Waiting / delivery time with CPA

struct WaitingTimeResult {
  Curve cdf;
  std::uint64_t censored = 0;
  std::uint64_t immediate = 0;
  /// Mean of the strictly positive, uncensored waiting times.
  double mean_positive_wait = 0.0;
  std::uint64_t positive = 0;
};

/// Empirical CDF of the CPA waiting time over mc.trials independent traces of
/// the Doppler process. Trace i uses seed derive_seed(mc.seed, i). Censored
/// traces count as exceeding every grid point.
inline WaitingTimeResult waiting_time_cdf_mc(const CpaParams& cpa, const FadingSpec& channel,
                                             const DopplerSpec& dspec,
                                             const std::vector<double>& t_grid,
                                             const MonteCarloConfig& mc,
                                             std::optional<double> cap_s = std::nullopt) {
  const double avg = channel.require_avg_gain();
  mc.validate();
  dspec.validate();
  require_increasing_grid(t_grid, "t_grid");
  const double g_min = cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz);
  const double cap = cap_s.value_or(default_passage_cap(dspec));

  constexpr std::uint64_t kTracesPerChunk = 1024;
  const auto chunks = run_chunks<std::vector<FirstPassage>>(
      mc.trials, kTracesPerChunk, mc.workers,
      [&](std::uint64_t, std::uint64_t begin, std::uint64_t count) {
        std::vector<FirstPassage> out(count);
        DopplerSpec trace_spec = dspec;
        for (std::uint64_t i = 0; i < count; ++i) {
          trace_spec.seed = derive_seed(mc.seed, begin + i);
          out[i] = first_passage_time(trace_spec, avg, g_min, cap);
        }
        return out;
      });

  WaitingTimeResult result;
  std::vector<double> waits;
  waits.reserve(mc.trials);
  double positive_sum = 0.0;
  for (const auto& chunk : chunks) {
    for (const auto& fp : chunk) {
      if (fp.censored) {
        ++result.censored;
        continue;
      }
      if (fp.seconds == 0.0) {
        ++result.immediate;
      } else {
        ++result.positive;
        positive_sum += fp.seconds;
      }
      waits.push_back(fp.seconds);
    }
  }
  std::sort(waits.begin(), waits.end());
  result.mean_positive_wait =
      result.positive ? positive_sum / static_cast<double>(result.positive) : 0.0;

  Curve& curve = result.cdf;
  curve.label = "wait-mc";
  curve.threshold_unit = "s";
  curve.shape = CurveShape::Cdf;
  curve.method = Method::MonteCarlo;
  for (double t : t_grid) {
    const auto hits = static_cast<std::uint64_t>(
        std::upper_bound(waits.begin(), waits.end(), t) - waits.begin());
    CurvePoint p;
    p.threshold = t;
    p.value = static_cast<double>(hits) / static_cast<double>(mc.trials);
    p.method = Method::MonteCarlo;
    p.ci = binomial_ci(hits, mc.trials, mc.ci_level);
    p.successes = hits;
    p.trials = mc.trials;
    p.flags = low_confidence_flag(hits);
    curve.points.push_back(std::move(p));
  }
  curve.metadata.emplace_back("censored", std::to_string(result.censored));
  curve.metadata.emplace_back("cap_s", std::to_string(cap));
  return result;
}

/// Level-crossing approximation of the waiting-time CDF:
///   P(wait <= t) = p0 + (1 - p0)(1 - e^{-t/AFD}),  p0 = e^{-g_min/avg}.
inline Curve waiting_time_cdf_lcr(const CpaParams& cpa, const FadingSpec& channel,
                                  double doppler_hz, const std::vector<double>& t_grid) {
  const double avg = channel.require_avg_gain();
  require_increasing_grid(t_grid, "t_grid");
  const double g_min = cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz);
  if (!(g_min > 0.0)) throw DomainError("waiting_time_cdf_lcr: g_min must be > 0");
  const double p0 = std::exp(-g_min / avg);
  const double afd = average_fade_duration(avg, g_min, doppler_hz);

  Curve curve;
  curve.label = "wait-lcr";
  curve.threshold_unit = "s";
  curve.shape = CurveShape::Cdf;
  curve.method = Method::ClosedForm;
  for (double t : t_grid) {
    CurvePoint p;
    p.threshold = t;
    p.value = p0 + (1.0 - p0) * -std::expm1(-t / afd);
    curve.points.push_back(p);
  }
  curve.metadata.emplace_back("afd_s", std::to_string(afd));
  return curve;
}

/// Delivery time = waiting time + constant T_tx: the waiting CDF shifted right.
inline Curve delivery_time_cdf(const Curve& waiting, const CpaParams& cpa, double bandwidth_hz,
                               double data_bits) {
  if (waiting.shape != CurveShape::Cdf) throw DomainError("delivery_time_cdf: need a CDF curve");
  waiting.validate();
  detail::require_nonnegative_bits(data_bits);
  const double shift = cpa_transmission_time(cpa, bandwidth_hz, data_bits);
  Curve out = waiting;
  out.label = waiting.label + "-delivery";
  for (auto& p : out.points) p.threshold += shift;
  out.metadata.emplace_back("t_tx_s", std::to_string(shift));
  return out;
}

// ---------------------------------------------------------------------------
// Inverse solvers

/// Minimal number of selection-combining branches for CRA to meet the DOR
/// target: ceil(ln target / ln DOR_1), corrected so that L passes and L-1 fails.
inline int required_diversity_order(const FadingSpec& channel, double data_bits,
                                    double delay_threshold_s, double dor_target) {
  if (!(dor_target > 0.0 && dor_target < 1.0)) {
    throw DomainError("required_diversity_order: target must lie in (0,1)");
  }
  FadingSpec single = channel;
  single.diversity_order = 1;
  const double d1 = dor_closed_form(CraStrategy{}, single, data_bits, delay_threshold_s);
  if (d1 >= 1.0) {
    throw Infeasible("required_diversity_order: single-branch DOR saturates at 1", d1);
  }
  if (d1 <= dor_target) return 1;
  auto passes = [&](int l) { return std::pow(d1, l) <= dor_target; };
  int l = static_cast<int>(std::ceil(std::log(dor_target) / std::log(d1)));
  l = std::max(l, 1);
  while (!passes(l)) ++l;
  while (l > 1 && passes(l - 1)) --l;
  return l;
}

/// Average SNR at which CRA with L branches meets the DOR target at load c:
/// per-branch target t^{1/L}, then (2^c - 1) / (-ln(1 - t^{1/L})).
inline double required_avg_snr(int branches, double load_bits_per_hz, double dor_target) {
  if (branches < 1) throw DomainError("required_avg_snr: branches must be >= 1");
  if (!(dor_target > 0.0 && dor_target < 1.0)) {
    throw DomainError("required_avg_snr: target must lie in (0,1)");
  }
  if (!(load_bits_per_hz > 0.0)) throw DomainError("required_avg_snr: load must be > 0");
  const double snr_needed = std::expm1(load_bits_per_hz * std::numbers::ln2);
  if (!std::isfinite(snr_needed)) {
    throw Infeasible("required_avg_snr: SNR threshold overflows", 1.0);
  }
  const double per_branch = branches == 1 ? dor_target : std::pow(dor_target, 1.0 / branches);
  return snr_needed / -std::log1p(-per_branch);
}

inline double required_avg_snr(int branches, double data_bits, double bandwidth_hz,
                               double delay_threshold_s, double dor_target) {
  return required_avg_snr(branches, spectral_load(data_bits, bandwidth_hz, delay_threshold_s),
                          dor_target);
}

/// Bisection in log-SNR on dor_closed_form; agrees with required_avg_snr.
inline double required_avg_snr_bisection(int branches, double load_bits_per_hz,
                                         double dor_target) {
  if (!(dor_target > 0.0 && dor_target < 1.0)) {
    throw DomainError("required_avg_snr_bisection: target must lie in (0,1)");
  }
  const double snr_needed = std::expm1(load_bits_per_hz * std::numbers::ln2);
  if (!std::isfinite(snr_needed) || !(snr_needed > 0.0)) {
    throw Infeasible("required_avg_snr_bisection: SNR threshold out of range", 1.0);
  }
  // DOR in terms of the load only: W = 1 Hz, H = c bits, T = 1 s.
  auto gap = [&](double log_avg) {
    const auto spec = FadingSpec::with_avg_snr(std::exp(log_avg), branches, 1.0);
    return dor_closed_form(CraStrategy{}, spec, load_bits_per_hz, 1.0) - dor_target;
  };
  const double center = std::log(snr_needed);
  const double log_avg = find_root_monotone(gap, RootBracket{center - 60.0, center + 60.0, 1e-13, 400});
  return std::exp(log_avg);
}

// ---------------------------------------------------------------------------

struct TradeoffRow {
  CpaParams params;
  double eor = 0.0;
  /// Probability of immediate transmission, e^{-g_min/avg}.
  double p0 = 0.0;
  double afd_s = 0.0;
  /// Unconditional mean wait under the level-crossing model, (1 - p0) AFD.
  double mean_wait_s = 0.0;
};

inline std::vector<TradeoffRow> cpa_tradeoff_table(const std::vector<CpaParams>& grid,
                                                   const FadingSpec& channel, double doppler_hz,
                                                   double data_bits, double energy_threshold_j) {
  if (grid.empty()) throw DomainError("cpa_tradeoff_table: empty grid");
  const double avg = channel.require_avg_gain();
  std::vector<TradeoffRow> rows;
  rows.reserve(grid.size());
  for (const auto& params : grid) {
    TradeoffRow row;
    row.params = params;
    row.eor = eor_closed_form(params, channel, data_bits, energy_threshold_j);
    const double g_min = cpa_min_gain(params, channel.noise_psd, channel.bandwidth_hz);
    row.p0 = std::exp(-g_min / avg);
    row.afd_s = average_fade_duration(avg, g_min, doppler_hz);
    row.mean_wait_s = (1.0 - row.p0) * row.afd_s;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace doqos
