#pragma once

// Rayleigh fading statistics: static SNR / power-gain distributions with
// selection combining, and a time-correlated gain process driven by a
// sum-of-sinusoids generator with the classical Doppler spectrum.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "doqos/errors.hpp"
#include "doqos/random.hpp"

namespace doqos {

enum class FadingFamily { Rayleigh };
enum class Combining { Selection };

/// Static channel statistics. Exactly one of avg_snr_linear / avg_gain is
/// consulted by any given computation.
struct FadingSpec {
  FadingFamily family = FadingFamily::Rayleigh;
  std::optional<double> avg_snr_linear;
  std::optional<double> avg_gain;
  double bandwidth_hz = 2e5;
  double noise_psd = 1e-7;  // W/Hz
  int diversity_order = 1;
  Combining combining = Combining::Selection;

  static FadingSpec with_avg_snr(double avg_snr, int branches = 1, double bandwidth = 2e5) {
    FadingSpec s;
    s.avg_snr_linear = avg_snr;
    s.diversity_order = branches;
    s.bandwidth_hz = bandwidth;
    return s;
  }

  static FadingSpec with_avg_gain(double gain, double noise = 1e-7, double bandwidth = 2e5) {
    FadingSpec s;
    s.avg_gain = gain;
    s.noise_psd = noise;
    s.bandwidth_hz = bandwidth;
    return s;
  }

  void validate() const {
    if (avg_snr_linear && !(*avg_snr_linear > 0.0)) {
      throw DomainError("FadingSpec: avg_snr_linear must be > 0");
    }
    if (avg_gain && !(*avg_gain > 0.0)) throw DomainError("FadingSpec: avg_gain must be > 0");
    if (!(bandwidth_hz > 0.0)) throw DomainError("FadingSpec: bandwidth_hz must be > 0");
    if (!(noise_psd > 0.0)) throw DomainError("FadingSpec: noise_psd must be > 0");
    if (diversity_order < 1) throw DomainError("FadingSpec: diversity_order must be >= 1");
  }

  double require_avg_snr() const {
    validate();
    if (!avg_snr_linear) throw DomainError("FadingSpec: avg_snr_linear is not set");
    return *avg_snr_linear;
  }

  double require_avg_gain() const {
    validate();
    if (!avg_gain) throw DomainError("FadingSpec: avg_gain is not set");
    return *avg_gain;
  }
};

/// CDF of the post-combining SNR: (1 - e^{-x/avg})^L.
inline double snr_cdf(const FadingSpec& spec, double x) {
  const double avg = spec.require_avg_snr();
  if (!(x >= 0.0)) throw DomainError("snr_cdf: x must be >= 0");
  const double single = -std::expm1(-x / avg);
  return spec.diversity_order == 1 ? single : std::pow(single, spec.diversity_order);
}

/// n i.i.d. post-combining SNR draws (max of L exponential branches).
inline std::vector<double> sample_snr(const FadingSpec& spec, std::uint64_t seed, std::size_t n) {
  const double avg = spec.require_avg_snr();
  if (n == 0) throw DomainError("sample_snr: n must be >= 1");
  Stream rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) {
    double best = 0.0;
    for (int b = 0; b < spec.diversity_order; ++b) best = std::max(best, rng.exponential(avg));
    v = best;
  }
  return out;
}

/// CDF of the single-branch power gain: 1 - e^{-g/avg_gain}.
inline double gain_cdf(const FadingSpec& spec, double g) {
  const double avg = spec.require_avg_gain();
  if (spec.diversity_order != 1) {
    throw UnsupportedConfiguration("gain_cdf: only single-branch channels are supported");
  }
  if (!(g >= 0.0)) throw DomainError("gain_cdf: g must be >= 0");
  return -std::expm1(-g / avg);
}

// ---------------------------------------------------------------------------
// Time-correlated gain process

struct DopplerSpec {
  double doppler_hz = 50.0;
  double sample_dt_s = 1.0 / (32.0 * 50.0);
  int num_sinusoids = 64;
  std::uint64_t seed = 1;

  /// Default resolution of 32 samples per Doppler period.
  static DopplerSpec for_doppler(double fd, std::uint64_t seed = 1) {
    DopplerSpec d;
    d.doppler_hz = fd;
    d.sample_dt_s = 1.0 / (32.0 * fd);
    d.seed = seed;
    return d;
  }

  void validate() const {
    if (!(doppler_hz > 0.0)) throw DomainError("DopplerSpec: doppler_hz must be > 0");
    if (!(sample_dt_s > 0.0)) throw DomainError("DopplerSpec: sample_dt_s must be > 0");
    // Small slack so that dt = 1/(16 fd) computed in floating point passes.
    if (sample_dt_s * 16.0 * doppler_hz > 1.0 + 1e-12) {
      throw DomainError("DopplerSpec: sample_dt_s must be <= 1/(16 doppler_hz)");
    }
    if (num_sinusoids < 8) throw DomainError("DopplerSpec: num_sinusoids must be >= 8");
  }
};

struct GainTrace {
  double dt_s = 0.0;
  std::vector<double> gains;

  double time_at(std::size_t i) const { return static_cast<double>(i) * dt_s; }
};

/// Sum-of-sinusoids Rayleigh process. In-phase and quadrature components each
/// sum N unit cosines with random phases; arrival angles are spread uniformly
/// over a quadrant with an independent random offset per sinusoid:
///   alpha_n = (2 pi n - pi + theta_n) / (4N).
/// The in-phase branch uses Doppler frequency fd cos(alpha_n), the quadrature
/// branch fd sin(alpha'_n). |h|^2 has unit mean; gain = avg_gain |h|^2.
class SosFadingProcess {
 public:
  SosFadingProcess(const DopplerSpec& dspec, double avg_gain)
      : dt_(dspec.sample_dt_s), avg_gain_(avg_gain) {
    dspec.validate();
    if (!(avg_gain > 0.0)) throw DomainError("SosFadingProcess: avg_gain must be > 0");
    const auto n = static_cast<std::size_t>(dspec.num_sinusoids);
    amplitude_ = 1.0 / std::sqrt(static_cast<double>(n));
    omega_.resize(2 * n);
    phase0_.resize(2 * n);
    re_.resize(2 * n);
    im_.resize(2 * n);
    step_re_.resize(2 * n);
    step_im_.resize(2 * n);

    Stream rng(dspec.seed);
    const double wd = 2.0 * std::numbers::pi * dspec.doppler_hz;
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const double idx = static_cast<double>(k % n) + 1.0;
      const double theta = rng.phase();
      const double alpha = (2.0 * std::numbers::pi * idx - std::numbers::pi + theta) / (4.0 * nn);
      omega_[k] = wd * (k < n ? std::cos(alpha) : std::sin(alpha));
      phase0_[k] = rng.phase();
      step_re_[k] = std::cos(omega_[k] * dt_);
      step_im_[k] = std::sin(omega_[k] * dt_);
    }
    resync();
  }

  double dt() const noexcept { return dt_; }
  std::uint64_t index() const noexcept { return index_; }

  /// Unit-power complex envelope at the current sample, then advance.
  std::complex<double> next_envelope() {
    const std::size_t n = omega_.size() / 2;
    double in_phase = 0.0;
    double quadrature = 0.0;
    for (std::size_t k = 0; k < n; ++k) in_phase += re_[k];
    for (std::size_t k = n; k < 2 * n; ++k) quadrature += re_[k];
    advance();
    return {amplitude_ * in_phase, amplitude_ * quadrature};
  }

  /// Power gain at the current sample, then advance.
  double next() { return avg_gain_ * std::norm(next_envelope()); }

  /// Direct evaluation of the envelope at an arbitrary time.
  std::complex<double> envelope_at(double t) const {
    const std::size_t n = omega_.size() / 2;
    double in_phase = 0.0;
    double quadrature = 0.0;
    for (std::size_t k = 0; k < n; ++k) in_phase += std::cos(omega_[k] * t + phase0_[k]);
    for (std::size_t k = n; k < 2 * n; ++k) quadrature += std::cos(omega_[k] * t + phase0_[k]);
    return {amplitude_ * in_phase, amplitude_ * quadrature};
  }

  double gain_at(double t) const { return avg_gain_ * std::norm(envelope_at(t)); }

 private:
  // Phasors are advanced by complex rotation and recomputed exactly at this
  // interval to bound rounding drift.
  static constexpr std::uint64_t kResyncInterval = 1024;

  void advance() {
    ++index_;
    if (index_ % kResyncInterval == 0) {
      resync();
      return;
    }
    for (std::size_t k = 0; k < omega_.size(); ++k) {
      const double r = re_[k] * step_re_[k] - im_[k] * step_im_[k];
      const double i = re_[k] * step_im_[k] + im_[k] * step_re_[k];
      re_[k] = r;
      im_[k] = i;
    }
  }

  void resync() {
    const double t = static_cast<double>(index_) * dt_;
    for (std::size_t k = 0; k < omega_.size(); ++k) {
      const double arg = omega_[k] * t + phase0_[k];
      re_[k] = std::cos(arg);
      im_[k] = std::sin(arg);
    }
  }

  double dt_;
  double avg_gain_;
  double amplitude_ = 1.0;
  std::uint64_t index_ = 0;
  std::vector<double> omega_, phase0_, re_, im_, step_re_, step_im_;
};

inline GainTrace sample_gain_process(const DopplerSpec& dspec, double avg_gain,
                                     double duration_s) {
  dspec.validate();
  if (!(duration_s >= 10.0 * dspec.sample_dt_s)) {
    throw DomainError("sample_gain_process: duration_s must be >= 10 sample_dt_s");
  }
  SosFadingProcess process(dspec, avg_gain);
  const auto n = static_cast<std::size_t>(std::floor(duration_s / dspec.sample_dt_s)) + 1;
  GainTrace trace;
  trace.dt_s = dspec.sample_dt_s;
  trace.gains.resize(n);
  for (auto& g : trace.gains) g = process.next();
  return trace;
}

struct FirstPassage {
  double seconds = 0.0;
  bool censored = false;
};

/// Default censoring horizon, 1000 Doppler periods.
inline double default_passage_cap(const DopplerSpec& dspec) { return 1000.0 / dspec.doppler_hz; }

/// First sample time at which the gain reaches g_min. The process starts from
/// its stationary distribution, so 0 is returned whenever the first sample
/// already permits transmission. No crossing by cap_s yields a censored result
/// carrying the cap.
inline FirstPassage first_passage_time(const DopplerSpec& dspec, double avg_gain, double g_min,
                                       std::optional<double> cap_s = std::nullopt) {
  if (!(g_min > 0.0)) throw DomainError("first_passage_time: g_min must be > 0");
  const double cap = cap_s.value_or(default_passage_cap(dspec));
  if (!(cap > 0.0)) throw DomainError("first_passage_time: cap must be > 0");
  SosFadingProcess process(dspec, avg_gain);
  const auto last = static_cast<std::uint64_t>(std::floor(cap / dspec.sample_dt_s));
  for (std::uint64_t i = 0; i <= last; ++i) {
    if (process.next() >= g_min) return {static_cast<double>(i) * dspec.sample_dt_s, false};
  }
  return {cap, true};
}

/// Rate of upward crossings of the gain level g_min: sqrt(2 pi) fd rho e^{-rho^2}.
inline double level_crossing_rate(double avg_gain, double g_min, double doppler_hz) {
  const double rho2 = g_min / avg_gain;
  return std::sqrt(2.0 * std::numbers::pi) * doppler_hz * std::sqrt(rho2) * std::exp(-rho2);
}

/// Mean time spent below g_min per fade: (e^{rho^2} - 1) / (rho fd sqrt(2 pi)).
inline double average_fade_duration(double avg_gain, double g_min, double doppler_hz) {
  if (!(avg_gain > 0.0) || !(g_min > 0.0) || !(doppler_hz > 0.0)) {
    throw DomainError("average_fade_duration: arguments must be > 0");
  }
  const double rho2 = g_min / avg_gain;
  return std::expm1(rho2) / (std::sqrt(rho2) * doppler_hz * std::sqrt(2.0 * std::numbers::pi));
}

/// Debug export, columns t_s,gain.
inline void write_gain_trace_csv(std::ostream& out, const GainTrace& trace) {
  out << "t_s,gain\n";
  char buf[64];
  for (std::size_t i = 0; i < trace.gains.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", trace.time_at(i), trace.gains[i]);
    out << buf;
  }
}

}  // namespace doqos
