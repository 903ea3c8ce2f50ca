#pragma once

// Idealized adaptive transmission strategies:
//   CRA  - continuous rate adaptation at constant power, W log2(1 + snr)
//   OPRA - water-filling power with rate W log2(snr / cutoff) above cutoff
//   CPA  - truncated channel inversion holding the received SNR constant
//   AMC  - discrete M-QAM modes switched at per-traffic-class SNR thresholds

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "doqos/errors.hpp"
#include "doqos/kvconfig.hpp"
#include "doqos/mathcore.hpp"

namespace doqos {

// ---------------------------------------------------------------------------
// CRA

inline double cra_rate(double snr, double bandwidth_hz) {
  if (!(snr >= 0.0)) throw DomainError("cra_rate: snr must be >= 0");
  return bandwidth_hz * std::log1p(snr) / std::log(2.0);
}

// ---------------------------------------------------------------------------
// OPRA

struct OpraParams {
  double cutoff_snr = 0.0;
};

/// Unit-average-power constraint for Rayleigh fading at the given cutoff:
///   e^{-c/avg}/c - E1(c/avg)/avg - 1.
inline double opra_constraint_residual(double avg_snr_linear, double cutoff) {
  const double x = cutoff / avg_snr_linear;
  return std::exp(-x) / cutoff - exp_integral_e1(x) / avg_snr_linear - 1.0;
}

inline OpraParams opra_cutoff(double avg_snr_linear) {
  if (!(avg_snr_linear > 0.0)) throw DomainError("opra_cutoff: avg_snr_linear must be > 0");
  double cutoff = 0.0;
  try {
    cutoff = find_root_monotone(
        [avg_snr_linear](double c) { return opra_constraint_residual(avg_snr_linear, c); },
        RootBracket{1e-9, 1.0, 1e-15, 200});
  } catch (const BracketError& e) {
    throw Error(std::string("opra_cutoff: internal fault, ") + e.what());
  }
  if (!(std::abs(opra_constraint_residual(avg_snr_linear, cutoff)) < 1e-9)) {
    throw Error("opra_cutoff: internal fault, residual above 1e-9");
  }
  return {cutoff};
}

/// 0 encodes "no transmission" at or below the cutoff.
inline double opra_rate(double snr, const OpraParams& params, double bandwidth_hz) {
  if (!(snr >= 0.0)) throw DomainError("opra_rate: snr must be >= 0");
  if (snr <= params.cutoff_snr) return 0.0;
  return bandwidth_hz * std::log2(snr / params.cutoff_snr);
}

/// Instantaneous transmit power relative to the average: (1/cutoff - 1/snr)+.
inline double opra_power_fraction(double snr, const OpraParams& params) {
  if (!(snr > 0.0)) throw DomainError("opra_power_fraction: snr must be > 0");
  if (snr <= params.cutoff_snr) return 0.0;
  return 1.0 / params.cutoff_snr - 1.0 / snr;
}

// ---------------------------------------------------------------------------
// CPA

struct CpaParams {
  double target_snr = 10.0;
  double peak_power_w = 1.0;
  double circuit_power_w = 0.0;

  void validate() const {
    if (!(target_snr > 0.0)) throw DomainError("CpaParams: target_snr must be > 0");
    if (!(peak_power_w > 0.0)) throw DomainError("CpaParams: peak_power_w must be > 0");
    if (!(circuit_power_w >= 0.0)) throw DomainError("CpaParams: circuit_power_w must be >= 0");
  }
};

/// Power that holds the received SNR at target: target N0 W / gain. Not capped.
inline double cpa_transmit_power(double gain, const CpaParams& params, double noise_psd,
                                 double bandwidth_hz) {
  if (!(gain > 0.0)) throw DomainError("cpa_transmit_power: gain must be > 0");
  return params.target_snr * noise_psd * bandwidth_hz / gain;
}

/// Truncation level: transmission is permitted exactly when gain >= this.
inline double cpa_min_gain(const CpaParams& params, double noise_psd, double bandwidth_hz) {
  params.validate();
  return params.target_snr * noise_psd * bandwidth_hz / params.peak_power_w;
}

/// Constant transmission time H / (W log2(1 + target)).
inline double cpa_transmission_time(const CpaParams& params, double bandwidth_hz,
                                    double data_bits) {
  params.validate();
  return data_bits / cra_rate(params.target_snr, bandwidth_hz);
}

// ---------------------------------------------------------------------------
// AMC

enum class TrafficClass { CriticalMtc, Mbb, MassiveMtc };

inline std::string to_string(TrafficClass c) {
  switch (c) {
    case TrafficClass::CriticalMtc: return "criticalMTC";
    case TrafficClass::Mbb: return "MBB";
    case TrafficClass::MassiveMtc: return "massiveMTC";
  }
  return "?";
}

inline std::optional<TrafficClass> parse_traffic_class(const std::string& s) {
  for (auto c : {TrafficClass::CriticalMtc, TrafficClass::Mbb, TrafficClass::MassiveMtc}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

struct AmcMode {
  int constellation_size = 4;
  double spectral_efficiency = 2.0;  // bits/symbol

  friend bool operator==(const AmcMode&, const AmcMode&) = default;
};

/// Upper bound (exclusive) on target BERs for which the exponential M-QAM
/// BER model can be inverted.
inline constexpr double kAmcMaxTargetBer = 0.2;

struct AmcScheme {
  std::vector<AmcMode> modes;
  std::map<TrafficClass, double> class_target_ber;

  void validate() const {
    if (modes.empty()) throw DomainError("AmcScheme: no modes");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (modes[i].constellation_size < 2) {
        throw DomainError("AmcScheme: constellation size must be >= 2");
      }
      if (!(modes[i].spectral_efficiency > 0.0)) {
        throw DomainError("AmcScheme: spectral efficiency must be > 0");
      }
      if (i > 0 && modes[i].constellation_size <= modes[i - 1].constellation_size) {
        throw DomainError("AmcScheme: modes must be strictly increasing in M");
      }
    }
    for (const auto& [cls, ber] : class_target_ber) {
      if (!(ber > 0.0 && ber < kAmcMaxTargetBer)) {
        throw DomainError("AmcScheme: target BER for " + to_string(cls) + " outside (0, 0.2)");
      }
    }
  }
};

/// Approximate uncoded M-QAM bit error rate 0.2 exp(-1.5 snr / (M - 1)).
inline double amc_ber(double snr, int constellation_size) {
  return 0.2 * std::exp(-1.5 * snr / (constellation_size - 1));
}

/// Smallest SNR meeting the target BER in each mode: -(M-1) ln(5 P) / 1.5.
inline double amc_threshold(int constellation_size, double target_ber) {
  if (!(target_ber > 0.0 && target_ber < kAmcMaxTargetBer)) {
    throw DomainError("amc_threshold: target BER must lie in (0, 0.2)");
  }
  return -(constellation_size - 1) * std::log(5.0 * target_ber) / 1.5;
}

inline std::vector<double> amc_thresholds(const AmcScheme& scheme, TrafficClass cls) {
  const auto it = scheme.class_target_ber.find(cls);
  if (it == scheme.class_target_ber.end()) {
    throw DomainError("amc_thresholds: no target BER for class " + to_string(cls));
  }
  scheme.validate();
  std::vector<double> out;
  out.reserve(scheme.modes.size());
  for (const auto& m : scheme.modes) out.push_back(amc_threshold(m.constellation_size, it->second));
  return out;
}

/// Highest mode whose threshold is <= snr (thresholds are closed below).
inline std::optional<AmcMode> amc_select_mode(const AmcScheme& scheme, TrafficClass cls,
                                              double snr) {
  const auto thresholds = amc_thresholds(scheme, cls);
  std::optional<AmcMode> chosen;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] <= snr) chosen = scheme.modes[i];
  }
  return chosen;
}

/// Rate of the selected mode, W x spectral efficiency; 0 when no mode qualifies.
inline double amc_rate(const AmcScheme& scheme, TrafficClass cls, double snr,
                       double bandwidth_hz) {
  const auto mode = amc_select_mode(scheme, cls, snr);
  return mode ? bandwidth_hz * mode->spectral_efficiency : 0.0;
}

/// Key-value AMC description:
///   modes = 4, 16, 64          (constellation sizes, log2(M) bits/symbol)
///   modes = 4:2, 16:4          (explicit bits/symbol per mode)
///   ber.criticalMTC = 1e-6     (one line per traffic class used)
inline AmcScheme amc_scheme_from_key_values(const KeyValues& kv) {
  AmcScheme scheme;
  bool have_modes = false;
  for (const auto& [key, value] : kv) {
    if (key == "modes") {
      have_modes = true;
      for (const auto& item : detail::split(value, ',')) {
        const auto parts = detail::split(item, ':');
        if (parts.size() > 2) throw ConfigError("modes", "bad mode entry '" + item + "'");
        AmcMode mode;
        mode.constellation_size = static_cast<int>(parse_integer("modes", parts[0]));
        mode.spectral_efficiency = parts.size() == 2
                                       ? parse_real("modes", parts[1])
                                       : std::log2(static_cast<double>(mode.constellation_size));
        scheme.modes.push_back(mode);
      }
    } else if (key.rfind("ber.", 0) == 0) {
      const auto cls = parse_traffic_class(key.substr(4));
      if (!cls) throw ConfigError(key, "unknown traffic class");
      scheme.class_target_ber[*cls] = parse_real(key, value);
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (!have_modes) throw ConfigError("modes", "missing");
  try {
    scheme.validate();
  } catch (const DomainError& e) {
    throw ConfigError("amc", e.what());
  }
  return scheme;
}

inline AmcScheme load_amc_scheme(const std::string& path) {
  return amc_scheme_from_key_values(load_key_values(path));
}

// ---------------------------------------------------------------------------

struct CraStrategy {};

struct AmcStrategy {
  AmcScheme scheme;
  TrafficClass traffic_class = TrafficClass::Mbb;
};

using StrategyParams = std::variant<CraStrategy, OpraParams, CpaParams, AmcStrategy>;

}  // namespace doqos
