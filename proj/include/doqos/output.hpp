#pragma once

// CSV and JSON serialization of curves. Numbers use the shortest
// representation that round-trips, so output is stable across runs.

#include <charconv>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "doqos/curve.hpp"

namespace doqos {

using ConfigLines = std::vector<std::pair<std::string, std::string>>;

inline std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline const char* to_string(CurveShape s) { return s == CurveShape::Tail ? "tail" : "cdf"; }

inline void write_csv(std::ostream& out, const ConfigLines& config, const std::vector<Curve>& curves) {
  for (const auto& [k, v] : config) out << "# " << k << '=' << v << '\n';
  out << "curve,threshold,value,method,ci_lo,ci_hi,successes,trials,flags\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.label << ',' << format_number(p.threshold) << ',' << format_number(p.value) << ','
          << to_string(p.method) << ',';
      if (p.ci) {
        out << format_number(p.ci->lo) << ',' << format_number(p.ci->hi) << ',' << p.successes
            << ',' << p.trials;
      } else {
        out << ",,,";
      }
      out << ',' << p.flags << '\n';
    }
  }
}

inline nlohmann::ordered_json curve_to_json(const Curve& c) {
  nlohmann::ordered_json j;
  j["label"] = c.label;
  j["threshold_unit"] = c.threshold_unit;
  j["shape"] = to_string(c.shape);
  j["method"] = to_string(c.method);
  auto& meta = j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : c.metadata) meta[k] = v;
  auto& pts = j["points"] = nlohmann::ordered_json::array();
  for (const auto& p : c.points) {
    nlohmann::ordered_json jp;
    jp["threshold"] = p.threshold;
    jp["value"] = p.value;
    jp["method"] = to_string(p.method);
    if (p.ci) {
      jp["ci_lo"] = p.ci->lo;
      jp["ci_hi"] = p.ci->hi;
      jp["successes"] = p.successes;
      jp["trials"] = p.trials;
    }
    jp["flags"] = p.flags;
    pts.push_back(std::move(jp));
  }
  return j;
}

inline void write_json(std::ostream& out, const ConfigLines& config, const std::vector<Curve>& curves,
                       const nlohmann::ordered_json& extra = {}) {
  nlohmann::ordered_json j;
  auto& cfg = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  auto& arr = j["curves"] = nlohmann::ordered_json::array();
  for (const auto& c : curves) arr.push_back(curve_to_json(c));
  if (!extra.is_null()) j["result"] = extra;
  out << j.dump(2) << '\n';
}

}  // namespace doqos
