#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "gass/error.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/toy_t2i.hpp"

namespace gass::io {

/// Every knob of a toy run. Defaults reproduce the reference setting:
/// B = 10, T = 50, 20 intervention steps, N = 10, r = 0.02, eta = 1e-4.
struct RunConfig {
  int batch_size = 10;
  int total_steps = 50;
  double alpha_bar_min = 0.01;

  int input_dim = 12;
  int embed_dim = 8;
  int components = 5;
  double component_std = 0.3;
  double center_norm = 8.0;
  double mean_spread = 0.5;
  std::uint64_t mixture_seed = 11;
  std::uint64_t encoder_seed = 7;
  int anchor_component = -1;  // -1: encode the mixture mean

  bool gass = false;
  int n_candidates = kDefaultCandidates;
  double r_dep = kDefaultExpansionRange;
  double r_ind = kDefaultExpansionRange;
  bool renormalize = true;
  bool hold_shifts = false;
  int gass_step_count = 20;
  std::vector<int> gass_steps;  // explicit steps; overrides gass_step_count when set
  bool gass_steps_explicit = false;

  double learning_rate = 1e-4;
  int max_steps = 60;
  double tolerance = 5e-4;
  int patience = 4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;

  std::uint64_t seed = 0;
};

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::int64_t>>;

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Drops a trailing comment that is not inside a string.
inline std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

inline std::optional<std::int64_t> parse_int(const std::string& s) {
  std::string t;
  for (char c : s)
    if (c != '_') t += c;
  if (t.empty()) return std::nullopt;
  std::int64_t v = 0;
  const char* first = t.data() + (t[0] == '+' ? 1 : 0);
  const auto [p, ec] = std::from_chars(first, t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) return std::nullopt;
  return v;
}

inline std::optional<double> parse_float(const std::string& s) {
  std::string t;
  for (char c : s)
    if (c != '_') t += c;
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline ConfigValue parse_value(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.empty()) throw Error(ErrorKind::ParseError, where + ": missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw Error(ErrorKind::ParseError, where + ": unterminated string");
    try {
      return json::parse(v).get<std::string>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::ParseError, where + ": bad string literal");
    }
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw Error(ErrorKind::ParseError, where + ": unterminated array");
    std::vector<std::int64_t> items;
    std::string body = v.substr(1, v.size() - 2);
    std::size_t start = 0;
    while (start <= body.size()) {
      auto comma = body.find(',', start);
      if (comma == std::string::npos) comma = body.size();
      const auto item = trim(body.substr(start, comma - start));
      if (!item.empty()) {
        const auto n = parse_int(item);
        if (!n) throw Error(ErrorKind::ParseError, where + ": arrays hold integers only");
        items.push_back(*n);
      }
      start = comma + 1;
    }
    return items;
  }
  if (auto n = parse_int(v)) return *n;
  if (auto x = parse_float(v)) return *x;
  throw Error(ErrorKind::ParseError, where + ": cannot parse value '" + v + "'");
}

}  // namespace detail

/// Flat TOML subset: `key = value` lines with booleans, integers, floats,
/// strings and integer arrays; `#` comments. Tables are rejected.
inline std::map<std::string, ConfigValue> parse_toml(const std::string& text,
                                                     const std::string& source = "<config>") {
  std::map<std::string, ConfigValue> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    const std::string line = detail::trim(detail::strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.front() == '[') throw Error(ErrorKind::ParseError, where + ": tables are not supported");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw Error(ErrorKind::ParseError, where + ": empty key");
    for (char c : key)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
        throw Error(ErrorKind::ParseError, where + ": bad key '" + key + "'");
    if (out.count(key)) throw Error(ErrorKind::ParseError, where + ": duplicate key '" + key + "'");
    out[key] = detail::parse_value(line.substr(eq + 1), where);
  }
  return out;
}

namespace detail {

template <class T>
T as(const ConfigValue& v, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (auto p = std::get_if<bool>(&v)) return *p;
    throw Error(ErrorKind::ParseError, key + " must be a boolean");
  } else if constexpr (std::is_same_v<T, double>) {
    if (auto p = std::get_if<double>(&v)) return *p;
    if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<double>(*p);
    throw Error(ErrorKind::ParseError, key + " must be a number");
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (auto p = std::get_if<std::int64_t>(&v); p && *p >= 0) return static_cast<std::uint64_t>(*p);
    if (auto p = std::get_if<std::string>(&v)) {
      try {
        std::size_t used = 0;
        const auto x = std::stoull(*p, &used);
        if (used == p->size()) return x;
      } catch (const std::exception&) {
      }
    }
    throw Error(ErrorKind::ParseError, key + " must be a non-negative integer");
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto p = std::get_if<std::int64_t>(&v)) return static_cast<int>(*p);
    throw Error(ErrorKind::ParseError, key + " must be an integer");
  } else {
    static_assert(std::is_same_v<T, std::vector<int>>);
    if (auto p = std::get_if<std::vector<std::int64_t>>(&v)) return std::vector<int>(p->begin(), p->end());
    throw Error(ErrorKind::ParseError, key + " must be an integer array");
  }
}

}  // namespace detail

/// Writes each parsed value onto `cfg`; unknown keys are a ParseError.
inline void apply_config(RunConfig& cfg, const std::map<std::string, ConfigValue>& values) {
  using detail::as;
  for (const auto& [key, v] : values) {
    if (key == "batch_size") cfg.batch_size = as<int>(v, key);
    else if (key == "total_steps") cfg.total_steps = as<int>(v, key);
    else if (key == "alpha_bar_min") cfg.alpha_bar_min = as<double>(v, key);
    else if (key == "input_dim") cfg.input_dim = as<int>(v, key);
    else if (key == "embed_dim") cfg.embed_dim = as<int>(v, key);
    else if (key == "components") cfg.components = as<int>(v, key);
    else if (key == "component_std") cfg.component_std = as<double>(v, key);
    else if (key == "center_norm") cfg.center_norm = as<double>(v, key);
    else if (key == "mean_spread") cfg.mean_spread = as<double>(v, key);
    else if (key == "mixture_seed") cfg.mixture_seed = as<std::uint64_t>(v, key);
    else if (key == "encoder_seed") cfg.encoder_seed = as<std::uint64_t>(v, key);
    else if (key == "anchor_component") cfg.anchor_component = as<int>(v, key);
    else if (key == "gass") cfg.gass = as<bool>(v, key);
    else if (key == "n_candidates") cfg.n_candidates = as<int>(v, key);
    else if (key == "r_dep") cfg.r_dep = as<double>(v, key);
    else if (key == "r_ind") cfg.r_ind = as<double>(v, key);
    else if (key == "renormalize") cfg.renormalize = as<bool>(v, key);
    else if (key == "hold_shifts") cfg.hold_shifts = as<bool>(v, key);
    else if (key == "gass_step_count") cfg.gass_step_count = as<int>(v, key);
    else if (key == "gass_steps") {
      cfg.gass_steps = as<std::vector<int>>(v, key);
      cfg.gass_steps_explicit = true;
    }
    else if (key == "learning_rate") cfg.learning_rate = as<double>(v, key);
    else if (key == "max_steps") cfg.max_steps = as<int>(v, key);
    else if (key == "tolerance") cfg.tolerance = as<double>(v, key);
    else if (key == "patience") cfg.patience = as<int>(v, key);
    else if (key == "beta1") cfg.beta1 = as<double>(v, key);
    else if (key == "beta2") cfg.beta2 = as<double>(v, key);
    else if (key == "eps_adam") cfg.eps_adam = as<double>(v, key);
    else if (key == "seed") cfg.seed = as<std::uint64_t>(v, key);
    else throw Error(ErrorKind::ParseError, "unknown config key '" + key + "'");
  }
}

inline RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  apply_config(cfg, parse_toml(read_text_file(path), path));
  return cfg;
}

/// `key=value` override from the command line, in TOML value syntax.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "override must look like key=value");
  apply_config(cfg, parse_toml(assignment, "--set"));
}

inline GassInterval intervention_interval(const RunConfig& cfg) {
  GassInterval interval = cfg.gass_steps_explicit
                              ? GassInterval{cfg.gass_steps}
                              : GassInterval::around(cfg.total_steps, cfg.gass_step_count);
  interval.validate(cfg.total_steps);
  return interval;
}

inline GassOptions gass_options(const RunConfig& cfg) {
  GassOptions o;
  o.interval = intervention_interval(cfg);
  o.expansion = {cfg.r_dep, cfg.r_ind, cfg.renormalize, 0};
  o.expansion.validate();
  o.guidance = {cfg.learning_rate, cfg.max_steps, cfg.tolerance, cfg.patience,
                cfg.beta1,         cfg.beta2,     cfg.eps_adam};
  o.guidance.validate();
  o.n_candidates = cfg.n_candidates;
  o.hold_shifts = cfg.hold_shifts;
  return o;
}

inline ToyModel build_model(const RunConfig& cfg) {
  if (cfg.batch_size < 1) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
  MixtureLayout layout{cfg.input_dim,  cfg.components,  cfg.component_std,
                       cfg.center_norm, cfg.mean_spread, cfg.mixture_seed};
  auto mixture = make_mixture(layout);
  auto schedule = NoiseSchedule::linear(cfg.total_steps, cfg.alpha_bar_min);
  ProxyEncoder encoder(cfg.input_dim, cfg.embed_dim, cfg.encoder_seed);
  std::optional<std::size_t> component;
  if (cfg.anchor_component >= 0) component = static_cast<std::size_t>(cfg.anchor_component);
  auto anchor = make_text_anchor(encoder, mixture, component);
  return {std::move(mixture), std::move(schedule), std::move(encoder), std::move(anchor)};
}

/// Every field as JSON, for manifests. Seeds are decimal strings.
inline json config_to_json(const RunConfig& c) {
  return {{"batch_size", c.batch_size},
          {"total_steps", c.total_steps},
          {"alpha_bar_min", c.alpha_bar_min},
          {"input_dim", c.input_dim},
          {"embed_dim", c.embed_dim},
          {"components", c.components},
          {"component_std", c.component_std},
          {"center_norm", c.center_norm},
          {"mean_spread", c.mean_spread},
          {"mixture_seed", std::to_string(c.mixture_seed)},
          {"encoder_seed", std::to_string(c.encoder_seed)},
          {"anchor_component", c.anchor_component},
          {"gass", c.gass},
          {"n_candidates", c.n_candidates},
          {"r_dep", c.r_dep},
          {"r_ind", c.r_ind},
          {"renormalize", c.renormalize},
          {"hold_shifts", c.hold_shifts},
          {"gass_step_count", c.gass_step_count},
          {"gass_steps", intervention_interval(c).steps},
          {"learning_rate", c.learning_rate},
          {"max_steps", c.max_steps},
          {"tolerance", c.tolerance},
          {"patience", c.patience},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps_adam", c.eps_adam},
          {"seed", std::to_string(c.seed)}};
}

/// Inverse of config_to_json. Floats were written with 12 significant
/// digits, which round-trips every default exactly.
inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::ParseError, "config snapshot must be an object");
  std::map<std::string, ConfigValue> values;
  for (const auto& [k, v] : j.items()) {
    if (v.is_boolean()) values[k] = v.get<bool>();
    else if (v.is_number_integer()) values[k] = v.get<std::int64_t>();
    else if (v.is_number()) values[k] = v.get<double>();
    else if (v.is_string()) values[k] = v.get<std::string>();
    else if (v.is_array()) values[k] = v.get<std::vector<std::int64_t>>();
    else throw Error(ErrorKind::ParseError, "config snapshot: bad value for " + k);
  }
  RunConfig cfg;
  apply_config(cfg, values);
  return cfg;
}

/// Same config as TOML text, loadable by load_config.
inline std::string config_to_toml(const RunConfig& c) {
  std::string out;
  const json j = config_to_json(c);
  for (const auto& [k, v] : j.items()) {
    out += k + " = ";
    if (v.is_number_float()) out += format_number(v.get<double>());
    else if (v.is_array()) {
      out += "[";
      for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i].get<int>());
      out += "]";
    } else out += v.dump();
    out += "\n";
  }
  return out;
}

}  // namespace gass::io
