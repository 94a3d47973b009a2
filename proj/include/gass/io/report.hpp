#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gass/diversity.hpp"
#include "gass/error.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/toy_t2i.hpp"
#include "gass/verifiers.hpp"

namespace gass::io {

inline constexpr int kReportSchemaVersion = 1;

/// Batch-level metrics of one run (or one scored file).
struct RunMetrics {
  std::string label;
  std::uint64_t seed = 0;
  bool gass = false;
  double d_dep = 0.0;
  double d_ind = 0.0;
  double spp = 0.0;
  double vendi = 1.0;
  double alignment = 0.0;
  std::size_t u_ind_index = 0;
  std::vector<ProjectionCoord> proj_coords;
};

/// One intervention step of one run.
struct StepMetrics {
  std::string label;
  std::uint64_t seed = 0;
  int t = 0;
  double d_dep = 0.0;
  double d_ind = 0.0;
  double spp = 0.0;
  double vendi = 1.0;
  double alignment = 0.0;
  double target_spread_dep = 0.0;
  double target_spread_ind = 0.0;
  double loss_initial = 0.0;
  double loss_final = 0.0;
  int optimizer_steps = 0;
  std::string stop_reason;
};

struct MetricsReport {
  std::vector<RunMetrics> runs;
  std::vector<StepMetrics> series;
  std::vector<volume::VerifierReport> verifiers;
  std::map<std::string, double> summary;
};

inline RunMetrics run_metrics(std::string label, std::uint64_t seed, bool gass,
                              const BatchMetrics& m) {
  RunMetrics r;
  r.label = std::move(label);
  r.seed = seed;
  r.gass = gass;
  r.d_dep = m.d_dep;
  r.d_ind = m.d_ind;
  r.spp = m.d_dep + m.d_ind;
  r.vendi = m.vendi;
  r.alignment = m.alignment;
  r.u_ind_index = m.u_ind_index;
  r.proj_coords = m.proj_coords;
  return r;
}

inline RunMetrics run_metrics(std::string label, const SpreadReport& spread, double vendi,
                              double alignment, std::size_t u_ind_index) {
  BatchMetrics m;
  m.d_dep = spread.d_dep;
  m.d_ind = spread.d_ind;
  m.vendi = vendi;
  m.alignment = alignment;
  m.u_ind_index = u_ind_index;
  m.proj_coords = spread.proj_coords;
  return run_metrics(std::move(label), 0, false, m);
}

inline std::vector<StepMetrics> step_series(const std::string& label, const RunRecord& record) {
  std::vector<StepMetrics> out;
  for (const auto& s : record.steps) {
    StepMetrics m;
    m.label = label;
    m.seed = record.seed;
    m.t = s.t;
    m.d_dep = s.before.d_dep;
    m.d_ind = s.before.d_ind;
    m.spp = s.before.d_dep + s.before.d_ind;
    m.vendi = s.before.vendi;
    m.alignment = s.before.alignment;
    m.target_spread_dep = s.target_spread_dep;
    m.target_spread_ind = s.target_spread_ind;
    m.loss_initial = s.trace.losses.empty() ? 0.0 : s.trace.losses.front();
    m.loss_final = s.trace.losses.empty() ? 0.0 : s.trace.losses.at(s.trace.best_step);
    m.optimizer_steps = s.trace.steps_taken;
    m.stop_reason = std::string(to_string(s.trace.stop_reason));
    out.push_back(std::move(m));
  }
  return out;
}

// JSON has no 64-bit unsigned guarantee across readers, so seeds travel as
// decimal strings.
inline json to_json(const RunMetrics& r) {
  json coords = json::array();
  for (const auto& c : r.proj_coords) coords.push_back(json::array({c.dep, c.ind}));
  return {{"label", r.label},
          {"seed", std::to_string(r.seed)},
          {"gass", r.gass},
          {"d_dep", r.d_dep},
          {"d_ind", r.d_ind},
          {"spp", r.spp},
          {"vendi", r.vendi},
          {"alignment", r.alignment},
          {"u_ind_index", r.u_ind_index},
          {"proj_coords", coords}};
}

inline json to_json(const StepMetrics& s) {
  return {{"label", s.label},
          {"seed", std::to_string(s.seed)},
          {"t", s.t},
          {"d_dep", s.d_dep},
          {"d_ind", s.d_ind},
          {"spp", s.spp},
          {"vendi", s.vendi},
          {"alignment", s.alignment},
          {"target_spread_dep", s.target_spread_dep},
          {"target_spread_ind", s.target_spread_ind},
          {"loss_initial", s.loss_initial},
          {"loss_final", s.loss_final},
          {"optimizer_steps", s.optimizer_steps},
          {"stop_reason", s.stop_reason}};
}

inline json to_json(const volume::VerifierReport& v) {
  json values = json::object();
  for (const auto& [k, x] : v.values) values[k] = x;
  return {{"name", v.name}, {"pass", v.pass}, {"values", values}};
}

inline json to_json(const MetricsReport& r) {
  json out = {{"schema_version", kReportSchemaVersion},
              {"runs", json::array()},
              {"series", json::array()},
              {"verifiers", json::array()},
              {"summary", json::object()}};
  for (const auto& x : r.runs) out["runs"].push_back(to_json(x));
  for (const auto& x : r.series) out["series"].push_back(to_json(x));
  for (const auto& x : r.verifiers) out["verifiers"].push_back(to_json(x));
  for (const auto& [k, v] : r.summary) out["summary"][k] = v;
  return out;
}

namespace detail {

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::ParseError, std::string("report is missing \"") + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad \"") + key + "\": " + e.what());
  }
}

inline std::uint64_t seed_field(const json& j) {
  const auto s = field<std::string>(j, "seed");
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "seed is not a decimal integer: " + s);
  }
}

// Tolerates the 12-digit rounding applied on write.
inline void check_spp(double spp, double d_dep, double d_ind) {
  if (!(std::abs(spp - (d_dep + d_ind)) <= 1e-10 * std::max(1.0, std::abs(spp))))
    throw Error(ErrorKind::ParseError, "record violates spp = d_dep + d_ind");
}

}  // namespace detail

inline MetricsReport report_from_json(const json& j) {
  using detail::field;
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "report must be a JSON object");
  if (field<int>(j, "schema_version") != kReportSchemaVersion)
    throw Error(ErrorKind::ParseError, "unsupported report schema_version");
  MetricsReport r;
  for (const auto& x : field<json>(j, "runs")) {
    RunMetrics m;
    m.label = field<std::string>(x, "label");
    m.seed = detail::seed_field(x);
    m.gass = field<bool>(x, "gass");
    m.d_dep = field<double>(x, "d_dep");
    m.d_ind = field<double>(x, "d_ind");
    m.spp = field<double>(x, "spp");
    m.vendi = field<double>(x, "vendi");
    m.alignment = field<double>(x, "alignment");
    m.u_ind_index = field<std::size_t>(x, "u_ind_index");
    for (const auto& c : field<json>(x, "proj_coords")) {
      if (!c.is_array() || c.size() != 2) throw Error(ErrorKind::ParseError, "proj_coords entries are pairs");
      m.proj_coords.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    detail::check_spp(m.spp, m.d_dep, m.d_ind);
    r.runs.push_back(std::move(m));
  }
  for (const auto& x : field<json>(j, "series")) {
    StepMetrics s;
    s.label = field<std::string>(x, "label");
    s.seed = detail::seed_field(x);
    s.t = field<int>(x, "t");
    s.d_dep = field<double>(x, "d_dep");
    s.d_ind = field<double>(x, "d_ind");
    s.spp = field<double>(x, "spp");
    s.vendi = field<double>(x, "vendi");
    s.alignment = field<double>(x, "alignment");
    s.target_spread_dep = field<double>(x, "target_spread_dep");
    s.target_spread_ind = field<double>(x, "target_spread_ind");
    s.loss_initial = field<double>(x, "loss_initial");
    s.loss_final = field<double>(x, "loss_final");
    s.optimizer_steps = field<int>(x, "optimizer_steps");
    s.stop_reason = field<std::string>(x, "stop_reason");
    detail::check_spp(s.spp, s.d_dep, s.d_ind);
    r.series.push_back(std::move(s));
  }
  for (const auto& x : field<json>(j, "verifiers")) {
    volume::VerifierReport v;
    v.name = field<std::string>(x, "name");
    v.pass = field<bool>(x, "pass");
    const auto values = field<json>(x, "values");
    for (const auto& [k, val] : values.items()) v.values[k] = val.get<double>();
    r.verifiers.push_back(std::move(v));
  }
  const auto summary = field<json>(j, "summary");
  for (const auto& [k, val] : summary.items()) r.summary[k] = val.get<double>();
  return r;
}

inline std::string format_report(const MetricsReport& r) { return to_canonical_json(to_json(r)); }

inline void write_report(const MetricsReport& r, const std::string& path) {
  write_text_file(path, format_report(r));
}

inline MetricsReport read_report(const std::string& path) { return report_from_json(read_json_file(path)); }

}  // namespace gass::io
