#pragma once

// Command-line front end. Settings are resolved in layers:
//   defaults < preset < config file < command-line flags
// and the resolved set is embedded in every output file.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "doqos/curve.hpp"
#include "doqos/errors.hpp"
#include "doqos/kvconfig.hpp"
#include "doqos/metrics.hpp"
#include "doqos/output.hpp"
#include "doqos/strategy.hpp"
#include "doqos/svg.hpp"

namespace doqos::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;

struct KeySpec {
  std::string name;
  std::string help;
  bool db = false;  // also accepted as <name>-db
  bool flag = false;
};

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  KeyValues defaults;
};

inline const std::vector<KeySpec>& common_keys() {
  static const std::vector<KeySpec> keys{
      {"seed", "master seed for Monte Carlo"},
      {"trials", "Monte Carlo trials (traces for wait)"},
      {"ci-level", "confidence level of the Wilson intervals"},
      {"format", "csv or json"},
      {"out", "output path (stdout when absent)"},
      {"preset", "fig2, fig3, fig4 or fig5"},
      {"plot", "also write an SVG next to --out", false, true},
      {"workers", "worker threads, 0 = all cores; never changes results"},
  };
  return keys;
}

inline const KeyValues& common_defaults() {
  static const KeyValues kv{{"seed", "1"},       {"trials", "100000"}, {"ci-level", "0.99"},
                            {"format", "csv"},   {"plot", "false"},    {"workers", "0"}};
  return kv;
}

inline const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> cmds{
      {"dor",
       "delay outage rate of CRA, OPRA or AMC",
       {{"strategy", "comma list of cra, opra, amc"},
        {"method", "closed-form, monte-carlo or both"},
        {"avg-snr", "average received SNR", true},
        {"bandwidth-hz", "channel bandwidth"},
        {"h-bits", "session size in bits"},
        {"branches", "comma list of selection-combining branch counts"},
        {"t-min-s", "smallest delay threshold"},
        {"t-max-s", "largest delay threshold"},
        {"t-grid-s", "explicit comma list of delay thresholds"},
        {"points-per-decade", "log grid density"},
        {"amc-config", "AMC mode table (key = value file)"},
        {"traffic-class", "criticalMTC, MBB or massiveMTC"}},
       {{"strategy", "cra"},
        {"method", "both"},
        {"bandwidth-hz", "200000"},
        {"branches", "1"},
        {"t-min-s", "0.001"},
        {"t-max-s", "1"},
        {"points-per-decade", "60"},
        {"traffic-class", "MBB"}}},
      {"eor",
       "energy outage rate of CPA",
       {{"method", "closed-form, monte-carlo or both"},
        {"avg-gain", "average channel power gain", true},
        {"noise-psd", "noise power spectral density, W/Hz"},
        {"bandwidth-hz", "channel bandwidth"},
        {"h-bits", "session size in bits"},
        {"gamma-c", "comma list of CPA target SNRs", true},
        {"pmax-w", "comma list of CPA peak powers"},
        {"pc-w", "circuit power"},
        {"e-min-j", "smallest energy threshold"},
        {"e-max-j", "largest energy threshold"},
        {"e-grid-j", "explicit comma list of energy thresholds"},
        {"points-per-decade", "log grid density"}},
       {{"method", "both"},
        {"noise-psd", "1e-07"},
        {"bandwidth-hz", "200000"},
        {"pc-w", "0"},
        {"e-min-j", "0.001"},
        {"e-max-j", "1"},
        {"points-per-decade", "60"}}},
      {"wait",
       "waiting-time CDF of CPA over a Doppler-faded channel",
       {{"avg-gain", "average channel power gain", true},
        {"noise-psd", "noise power spectral density, W/Hz"},
        {"bandwidth-hz", "channel bandwidth"},
        {"doppler-hz", "maximum Doppler frequency"},
        {"dt-s", "fading sample spacing (default 1/(32 f_d))"},
        {"gamma-c", "CPA target SNR", true},
        {"pmax-w", "CPA peak power"},
        {"h-bits", "session size; adds delivery-time curves"},
        {"t-max-s", "largest waiting time on the grid"},
        {"t-points", "grid points from 0 to t-max-s"},
        {"t-grid-s", "explicit comma list of waiting times"},
        {"cap-s", "censoring cap per trace (default 1000/f_d)"}},
       {{"noise-psd", "1e-07"},
        {"bandwidth-hz", "200000"},
        {"doppler-hz", "50"},
        {"t-max-s", "0.2"},
        {"t-points", "201"}}},
      {"solve",
       "smallest diversity order or average SNR meeting a DOR target",
       {{"find", "branches or avg-snr"},
        {"avg-snr", "average received SNR", true},
        {"bandwidth-hz", "channel bandwidth"},
        {"h-bits", "session size in bits"},
        {"t-th-s", "delay threshold"},
        {"c", "spectral load H/(W T) in bit/s/Hz"},
        {"target", "DOR target"},
        {"branches", "branch count for --find avg-snr"}},
       {{"bandwidth-hz", "200000"}, {"branches", "1"}}},
  };
  return cmds;
}

struct Preset {
  std::string command;
  KeyValues values;
};

inline const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> p{
      {"fig2",
       {"dor",
        {{"avg-snr-db", "10"},
         {"bandwidth-hz", "200000"},
         {"h-bits", "20000"},
         {"strategy", "cra,opra"},
         {"t-min-s", "0.001"},
         {"t-max-s", "1"}}}},
      {"fig3",
       {"dor",
        {{"avg-snr-db", "20"},
         {"bandwidth-hz", "200000"},
         {"h-bits", "5000"},
         {"strategy", "cra"},
         {"branches", "1,2,5,10,15"},
         {"t-min-s", "0.001"},
         {"t-max-s", "1"}}}},
      {"fig4",
       {"eor",
        {{"h-bits", "50000"},
         {"avg-gain-db", "-10"},
         {"bandwidth-hz", "200000"},
         {"noise-psd", "1e-07"}}}},
      {"fig5",
       {"wait",
        {{"avg-gain-db", "-10"},
         {"doppler-hz", "50"},
         {"noise-psd", "1e-07"},
         {"bandwidth-hz", "200000"}}}},
  };
  return p;
}

/// Resolved settings with the source of each value.
class Settings {
 public:
  Settings(const CommandSpec& cmd, std::ostream& log) : cmd_(&cmd), log_(&log) {}

  /// Applies one layer. dB spellings are converted to the linear key.
  void apply(const KeyValues& layer, const std::string& source, bool log_overrides) {
    std::set<std::string> seen;
    for (const auto& [raw_key, raw_value] : layer) {
      const auto [key, value] = canonical(raw_key, raw_value);
      if (!seen.insert(key).second) {
        throw ConfigError(raw_key, "given both in dB and linear form (" + source + ")");
      }
      auto it = values_.find(key);
      if (it != values_.end() && log_overrides && it->second.source != "default" &&
          it->second.value != value) {
        *log_ << "doqos: " << key << " = " << value << " (" << source << ") overrides " << it->second.value
              << " (" << it->second.source << ")\n";
      }
      values_[key] = {value, source};
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "required but not set");
    return it->second.value;
  }

  double real(const std::string& key) const {
    const double v = parse_real(key, str(key));
    if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
    return v;
  }
  double positive(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0)) throw ConfigError(key, "must be > 0");
    return v;
  }
  double nonnegative(const std::string& key) const {
    const double v = real(key);
    if (!(v >= 0.0)) throw ConfigError(key, "must be >= 0");
    return v;
  }
  double open_probability(const std::string& key) const {
    const double v = real(key);
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(key, "must lie in (0,1)");
    return v;
  }
  long long integer(const std::string& key, long long min) const {
    const long long v = parse_integer(key, str(key));
    if (v < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    return v;
  }
  std::uint64_t unsigned64(const std::string& key, std::uint64_t min) const {
    const std::string t = detail::trim(str(key));
    std::uint64_t v = 0;
    const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
      throw ConfigError(key, "expected a non-negative integer, got '" + t + "'");
    }
    if (v < min) throw ConfigError(key, "must be >= " + std::to_string(min));
    return v;
  }
  bool boolean(const std::string& key) const {
    const std::string t = detail::trim(str(key));
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw ConfigError(key, "expected true or false");
  }
  std::vector<double> positive_list(const std::string& key) const {
    auto v = parse_real_list(key, str(key));
    for (double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(key, "values must be finite and > 0");
    }
    return v;
  }
  std::vector<std::string> word_list(const std::string& key) const {
    auto v = detail::split(str(key), ',');
    for (const auto& w : v) {
      if (w.empty()) throw ConfigError(key, "empty list entry");
    }
    return v;
  }

  /// Resolved configuration for embedding; run-local keys are left out.
  ConfigLines embedded() const {
    ConfigLines out{{"command", cmd_->name}};
    for (const auto& [k, e] : values_) {
      if (k == "workers" || k == "out" || k == "plot") continue;
      out.emplace_back(k, e.value);
    }
    return out;
  }

 private:
  struct Entry {
    std::string value;
    std::string source;
  };

  std::pair<std::string, std::string> canonical(const std::string& key, const std::string& value) const {
    for (const auto& k : common_keys()) {
      if (k.name == key) return {key, value};
    }
    for (const auto& k : cmd_->keys) {
      if (k.name == key) return {key, value};
      if (k.db && key == k.name + "-db") {
        std::string converted;
        for (const auto& item : detail::split(value, ',')) {
          const double db = parse_real(key, item);
          if (!converted.empty()) converted += ',';
          converted += format_number(std::pow(10.0, db / 10.0));
        }
        return {k.name, converted};
      }
    }
    throw ConfigError(key, "unknown key for '" + cmd_->name + "'");
  }

  const CommandSpec* cmd_;
  std::ostream* log_;
  std::map<std::string, Entry> values_;
};

struct Output {
  std::vector<Curve> curves;
  nlohmann::ordered_json result;  // solve report
  std::string x_label;
  std::string y_label;
  int exit_code = kExitOk;
};

namespace detail {

inline MonteCarloConfig monte_carlo(const Settings& s) {
  MonteCarloConfig mc;
  mc.trials = s.unsigned64("trials", 1);
  mc.seed = s.unsigned64("seed", 0);
  mc.ci_level = s.open_probability("ci-level");
  mc.workers = static_cast<unsigned>(s.integer("workers", 0));
  return mc;
}

inline std::vector<double> threshold_grid(const Settings& s, const std::string& list_key,
                                          const std::string& min_key, const std::string& max_key) {
  std::vector<double> grid;
  if (s.has(list_key)) {
    grid = parse_real_list(list_key, s.str(list_key));
  } else {
    const double lo = s.positive(min_key);
    const double hi = s.positive(max_key);
    if (!(hi > lo)) throw ConfigError(max_key, "must exceed " + min_key);
    const double ppd = s.positive("points-per-decade");
    const auto n = static_cast<std::size_t>(std::llround(ppd * std::log10(hi / lo))) + 1;
    grid = log_grid(lo, hi, std::max<std::size_t>(n, 2));
  }
  require_increasing_grid(grid, list_key);
  if (!(grid.front() > 0.0)) throw ConfigError(list_key, "thresholds must be > 0");
  return grid;
}

enum class Methods { ClosedForm, MonteCarlo, Both };

inline Methods methods(const Settings& s) {
  const auto& m = s.str("method");
  if (m == "closed-form") return Methods::ClosedForm;
  if (m == "monte-carlo") return Methods::MonteCarlo;
  if (m == "both") return Methods::Both;
  throw ConfigError("method", "expected closed-form, monte-carlo or both");
}

inline std::string label_number(double v) { return format_number(v); }

}  // namespace detail

inline Output run_dor(const Settings& s) {
  const double avg = s.positive("avg-snr");
  const double bandwidth = s.positive("bandwidth-hz");
  const double bits = s.nonnegative("h-bits");
  const auto method = detail::methods(s);
  const auto grid = detail::threshold_grid(s, "t-grid-s", "t-min-s", "t-max-s");
  std::vector<int> branches;
  for (double b : parse_real_list("branches", s.str("branches"))) {
    if (!(b >= 1.0) || b != std::floor(b) || b > 1000.0) {
      throw ConfigError("branches", "entries must be integers in [1, 1000]");
    }
    branches.push_back(static_cast<int>(b));
  }
  const auto mc = method == detail::Methods::ClosedForm ? MonteCarloConfig{} : detail::monte_carlo(s);

  Output out;
  out.x_label = "delay threshold (s)";
  out.y_label = "DOR";
  for (const auto& name : s.word_list("strategy")) {
    StrategyParams strategy;
    std::vector<std::pair<std::string, std::string>> meta{{"strategy", name}};
    if (name == "cra") {
      strategy = CraStrategy{};
    } else if (name == "opra") {
      const auto p = opra_cutoff(avg);
      strategy = p;
      meta.emplace_back("cutoff_snr", format_number(p.cutoff_snr));
    } else if (name == "amc") {
      if (!s.has("amc-config")) throw ConfigError("amc-config", "required for strategy amc");
      const auto cls = parse_traffic_class(s.str("traffic-class"));
      if (!cls) throw ConfigError("traffic-class", "expected criticalMTC, MBB or massiveMTC");
      strategy = AmcStrategy{load_amc_scheme(s.str("amc-config")), *cls};
      meta.emplace_back("traffic_class", to_string(*cls));
    } else {
      throw ConfigError("strategy", "unknown strategy '" + name + "'");
    }
    for (int l : branches) {
      const auto channel = FadingSpec::with_avg_snr(avg, l, bandwidth);
      const std::string label = branches.size() > 1 || l > 1 ? name + "-L" + std::to_string(l) : name;
      const bool has_closed_form = name == "cra" || (name == "opra" && l == 1);
      if (method == detail::Methods::ClosedForm && !has_closed_form) {
        throw ConfigError("method", "no closed form for " + label + "; use monte-carlo");
      }
      auto add = [&](Curve c) {
        c.label = label;
        c.metadata = meta;
        c.metadata.emplace_back("branches", std::to_string(l));
        out.curves.push_back(std::move(c));
      };
      if (method != detail::Methods::MonteCarlo && has_closed_form) {
        add(dor_curve_closed_form(strategy, channel, bits, grid));
      }
      if (method != detail::Methods::ClosedForm) {
        add(dor_curve_monte_carlo(strategy, channel, bits, grid, mc));
      }
    }
  }
  return out;
}

inline Output run_eor(const Settings& s) {
  const double avg = s.positive("avg-gain");
  const double noise = s.positive("noise-psd");
  const double bandwidth = s.positive("bandwidth-hz");
  const double bits = s.nonnegative("h-bits");
  const double circuit = s.nonnegative("pc-w");
  const auto gammas = s.positive_list("gamma-c");
  const auto peaks = s.positive_list("pmax-w");
  if (gammas.size() != peaks.size() && gammas.size() != 1 && peaks.size() != 1) {
    throw ConfigError("pmax-w", "gamma-c and pmax-w lists must pair up (or one has one entry)");
  }
  const auto method = detail::methods(s);
  const auto grid = detail::threshold_grid(s, "e-grid-j", "e-min-j", "e-max-j");
  const auto mc = method == detail::Methods::ClosedForm ? MonteCarloConfig{} : detail::monte_carlo(s);
  const auto channel = FadingSpec::with_avg_gain(avg, noise, bandwidth);

  Output out;
  out.x_label = "energy threshold (J)";
  out.y_label = "EOR";
  const std::size_t n = std::max(gammas.size(), peaks.size());
  for (std::size_t i = 0; i < n; ++i) {
    const CpaParams cpa{gammas[gammas.size() == 1 ? 0 : i], peaks[peaks.size() == 1 ? 0 : i], circuit};
    const std::string label = "cpa-gc" + detail::label_number(cpa.target_snr) + "-pmax" +
                              detail::label_number(cpa.peak_power_w);
    auto add = [&](Curve c) {
      c.label = label;
      c.metadata = {{"gamma_c", format_number(cpa.target_snr)},
                    {"pmax_w", format_number(cpa.peak_power_w)},
                    {"g_min", format_number(cpa_min_gain(cpa, noise, bandwidth))},
                    {"peak_energy_j", format_number(cpa_peak_energy(cpa, bandwidth, bits))}};
      out.curves.push_back(std::move(c));
    };
    if (method != detail::Methods::MonteCarlo) add(eor_curve_closed_form(cpa, channel, bits, grid));
    if (method != detail::Methods::ClosedForm) add(eor_curve_monte_carlo(cpa, channel, bits, grid, mc));
  }
  return out;
}

inline Output run_wait(const Settings& s) {
  const double avg = s.positive("avg-gain");
  const double noise = s.positive("noise-psd");
  const double bandwidth = s.positive("bandwidth-hz");
  const double fd = s.positive("doppler-hz");
  const CpaParams cpa{s.positive("gamma-c"), s.positive("pmax-w"), 0.0};
  const auto mc = detail::monte_carlo(s);
  std::vector<double> grid;
  if (s.has("t-grid-s")) {
    grid = parse_real_list("t-grid-s", s.str("t-grid-s"));
  } else {
    const auto points = s.integer("t-points", 2);
    grid = linear_grid(0.0, s.positive("t-max-s"), static_cast<std::size_t>(points));
  }
  require_increasing_grid(grid, "t-grid-s");

  auto dspec = DopplerSpec::for_doppler(fd, mc.seed);
  if (s.has("dt-s")) dspec.sample_dt_s = s.positive("dt-s");
  try {
    dspec.validate();
  } catch (const DomainError& e) {
    throw ConfigError("dt-s", e.what());
  }
  std::optional<double> cap;
  if (s.has("cap-s")) cap = s.positive("cap-s");
  const auto channel = FadingSpec::with_avg_gain(avg, noise, bandwidth);

  Output out;
  out.x_label = "time (s)";
  out.y_label = "CDF";
  auto mc_result = waiting_time_cdf_mc(cpa, channel, dspec, grid, mc, cap);
  mc_result.cdf.metadata.emplace_back("immediate", std::to_string(mc_result.immediate));
  mc_result.cdf.metadata.emplace_back("mean_positive_wait_s", format_number(mc_result.mean_positive_wait));
  auto lcr = waiting_time_cdf_lcr(cpa, channel, fd, grid);
  out.curves.push_back(mc_result.cdf);
  out.curves.push_back(lcr);
  if (s.has("h-bits")) {
    const double bits = s.nonnegative("h-bits");
    out.curves.push_back(delivery_time_cdf(mc_result.cdf, cpa, bandwidth, bits));
    out.curves.push_back(delivery_time_cdf(lcr, cpa, bandwidth, bits));
  }
  if (2 * mc_result.censored > mc.trials) out.exit_code = kExitInfeasible;
  return out;
}

inline Output run_solve(const Settings& s, std::ostream& err) {
  Output out;
  const auto& find = s.str("find");
  const double target = s.open_probability("target");
  auto& r = out.result;
  r["find"] = find;
  r["target"] = target;
  if (find == "branches") {
    const double avg = s.positive("avg-snr");
    const double bits = s.nonnegative("h-bits");
    const double t = s.positive("t-th-s");
    const auto channel = FadingSpec::with_avg_snr(avg, 1, s.positive("bandwidth-hz"));
    try {
      const int l = required_diversity_order(channel, bits, t, target);
      auto at = [&](int n) {
        auto c = channel;
        c.diversity_order = n;
        return dor_closed_form(CraStrategy{}, c, bits, t);
      };
      r["status"] = "ok";
      r["value"] = l;
      r["dor_at_value"] = at(l);
      if (l > 1) {
        r["previous"] = l - 1;
        r["dor_at_previous"] = at(l - 1);
      }
    } catch (const Infeasible& e) {
      r["status"] = "infeasible";
      r["saturated_dor"] = e.saturated_value();
      err << "doqos: infeasible: single-branch DOR is " << format_number(e.saturated_value())
          << " at this threshold; no branch count meets the target\n";
      out.exit_code = kExitInfeasible;
    }
  } else if (find == "avg-snr") {
    const int branches = static_cast<int>(s.integer("branches", 1));
    double load = 0.0;
    if (s.has("c")) {
      load = s.positive("c");
    } else {
      load = spectral_load(s.nonnegative("h-bits"), s.positive("bandwidth-hz"), s.positive("t-th-s"));
      if (!(load > 0.0)) throw ConfigError("h-bits", "load must be > 0");
    }
    try {
      const double snr = required_avg_snr(branches, load, target);
      // A slightly lower average SNR must miss the target.
      const double below = snr * (1.0 - 1e-6);
      auto at = [&](double avg) {
        return dor_closed_form(CraStrategy{}, FadingSpec::with_avg_snr(avg, branches, 1.0), load, 1.0);
      };
      r["status"] = "ok";
      r["load_bits_per_hz"] = load;
      r["value"] = snr;
      r["value_db"] = 10.0 * std::log10(snr);
      r["dor_at_value"] = at(snr);
      r["previous"] = below;
      r["dor_at_previous"] = at(below);
    } catch (const Infeasible& e) {
      r["status"] = "infeasible";
      r["saturated_dor"] = e.saturated_value();
      err << "doqos: infeasible: " << e.what() << '\n';
      out.exit_code = kExitInfeasible;
    }
  } else {
    throw ConfigError("find", "expected branches or avg-snr");
  }
  return out;
}

inline void write_solve_csv(std::ostream& os, const ConfigLines& config, const nlohmann::ordered_json& r) {
  for (const auto& [k, v] : config) os << "# " << k << '=' << v << '\n';
  os << "key,value\n";
  for (const auto& [k, v] : r.items()) {
    os << k << ',';
    if (v.is_string()) {
      os << v.get<std::string>();
    } else if (v.is_number_integer()) {
      os << v.get<long long>();
    } else {
      os << format_number(v.get<double>());
    }
    os << '\n';
  }
}

inline const CommandSpec* find_command(const std::string& name) {
  for (const auto& c : commands()) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Delay and energy outage of data sessions over fading channels", "doqos"};
  app.require_subcommand(1);

  // Raw flag text per command, recorded only when the flag is given.
  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, bool> plot_flags;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    auto& slot = given[cmd.name];
    auto add = [&](const KeySpec& k) {
      if (k.flag) {
        sub->add_flag_callback("--" + k.name, [&slot, name = k.name] { slot[name] = "true"; }, k.help);
        return;
      }
      sub->add_option_function<std::string>(
          "--" + k.name, [&slot, name = k.name](const std::string& v) { slot[name] = v; }, k.help);
      if (k.db) {
        sub->add_option_function<std::string>(
            "--" + k.name + "-db", [&slot, name = k.name + "-db"](const std::string& v) { slot[name] = v; },
            k.help + " in dB");
      }
    };
    for (const auto& k : common_keys()) add(k);
    for (const auto& k : cmd.keys) add(k);
    sub->add_option("--config", config_paths[cmd.name], "key = value settings file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "doqos: error: " << e.what() << '\n';
    return kExitConfig;
  }

  const CommandSpec* cmd = find_command(app.get_subcommands().front()->get_name());
  try {
    KeyValues flag_layer(given[cmd->name].begin(), given[cmd->name].end());
    KeyValues file_layer;
    const std::string& config_path = config_paths[cmd->name];
    if (!config_path.empty()) {
      file_layer = load_key_values(config_path);
      for (const auto& [k, v] : file_layer) {
        if (k == "config") throw ConfigError("config", "config files cannot include other files");
      }
    }

    std::optional<std::string> preset_name;
    for (const auto* layer : {&file_layer, &flag_layer}) {
      for (const auto& [k, v] : *layer) {
        if (k == "preset") preset_name = v;
      }
    }

    Settings settings(*cmd, err);
    settings.apply(common_defaults(), "default", false);
    settings.apply(cmd->defaults, "default", false);
    if (preset_name) {
      auto it = presets().find(*preset_name);
      if (it == presets().end()) throw ConfigError("preset", "unknown preset '" + *preset_name + "'");
      if (it->second.command != cmd->name) {
        throw ConfigError("preset", *preset_name + " applies to '" + it->second.command + "', not '" +
                                        cmd->name + "'");
      }
      settings.apply(it->second.values, "preset " + *preset_name, true);
    }
    settings.apply(file_layer, "config " + config_path, true);
    settings.apply(flag_layer, "flag", true);

    const std::string format = settings.str("format");
    if (format != "csv" && format != "json") throw ConfigError("format", "expected csv or json");
    const bool plot = settings.boolean("plot");
    const std::string out_path = settings.has("out") ? settings.str("out") : "";
    if (plot && out_path.empty()) throw ConfigError("plot", "needs --out to place the SVG");
    if (plot && cmd->name == "solve") throw ConfigError("plot", "solve produces no curves");

    Output result;
    if (cmd->name == "dor") {
      result = run_dor(settings);
    } else if (cmd->name == "eor") {
      result = run_eor(settings);
    } else if (cmd->name == "wait") {
      result = run_wait(settings);
    } else {
      result = run_solve(settings, err);
    }
    for (const auto& c : result.curves) c.validate();

    // Render fully before touching the output file.
    std::ostringstream body;
    const auto config = settings.embedded();
    if (format == "json") {
      write_json(body, config, result.curves, cmd->name == "solve" ? result.result : nlohmann::ordered_json{});
    } else if (cmd->name == "solve") {
      write_solve_csv(body, config, result.result);
    } else {
      write_csv(body, config, result.curves);
    }
    if (out_path.empty()) {
      out << body.str();
    } else {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) throw ConfigError("out", "cannot open '" + out_path + "' for writing");
      f << body.str();
      if (plot) {
        auto svg_path = std::filesystem::path(out_path).replace_extension(".svg");
        std::ofstream svg(svg_path, std::ios::binary);
        if (!svg) throw ConfigError("plot", "cannot open '" + svg_path.string() + "'");
        write_svg(svg, result.curves, result.x_label, result.y_label);
      }
    }
    if (result.exit_code == kExitInfeasible && cmd->name == "wait") {
      err << "doqos: more than half of the traces were censored; raise --cap-s\n";
    }
    return result.exit_code;
  } catch (const ConfigError& e) {
    err << "doqos: error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Infeasible& e) {
    err << "doqos: infeasible: " << e.what() << " (saturated at " << format_number(e.saturated_value())
        << ")\n";
    return kExitInfeasible;
  } catch (const Error& e) {
    err << "doqos: error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace doqos::cli
