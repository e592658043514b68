#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "overtake/errors.hpp"
#include "overtake/format.hpp"
#include "overtake/highway_env.hpp"
#include "overtake/td_learning.hpp"

namespace overtake {

enum class SweepKind { epsilon, density };

struct ExperimentConfig {
  Algorithm algo = Algorithm::q_learning;
  std::size_t replications = 20;
  std::size_t threads = 0;
  std::size_t eval_episodes = 20;
  SweepKind sweep = SweepKind::epsilon;
  std::vector<EpsilonSchedule> schedules{EpsilonSchedule::decay(0.1, 0.99), EpsilonSchedule::fixed(0.1)};
  std::vector<int> densities{5, 10};

  void validate() const {
    if (replications < 1) throw ConfigError("experiment.replications must be >= 1");
    if (eval_episodes < 1) throw ConfigError("experiment.eval_episodes must be >= 1");
  }
};

/// defaults < config file < command-line overrides. `env.seed` is the one
/// user-visible seed; experiments use it as the base seed.
struct ResolvedConfig {
  EnvConfig env;
  HyperParams params;
  ExperimentConfig experiment;

  void validate() const {
    env.validate();
    params.validate();
    experiment.validate();
  }
};

namespace config_detail {

inline bool parse_bool(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(std::string(what) + ": expected a boolean, got '" + std::string(text) + "'");
}

struct Key {
  std::string_view section;
  std::string_view name;
  std::function<void(ResolvedConfig&, std::string_view, const std::string&)> set;
  std::function<std::string(const ResolvedConfig&)> get;

  std::string qualified() const { return std::string(section) + "." + std::string(name); }
};

template <class T>
Key number_key(std::string_view section, std::string_view name, T ResolvedConfig::*part, auto member) {
  return {section, name,
          [part, member](ResolvedConfig& c, std::string_view v, const std::string& what) {
            using Field = std::remove_reference_t<decltype((c.*part).*member)>;
            (c.*part).*member = parse_number<Field>(v, what);
          },
          [part, member](const ResolvedConfig& c) {
            const auto value = (c.*part).*member;
            if constexpr (std::is_floating_point_v<decltype(value)>) {
              return format_double(value);
            } else {
              return std::to_string(value);
            }
          }};
}

template <class T>
Key bool_key(std::string_view section, std::string_view name, T ResolvedConfig::*part, bool T::*member) {
  return {section, name,
          [part, member](ResolvedConfig& c, std::string_view v, const std::string& what) {
            (c.*part).*member = parse_bool(v, what);
          },
          [part, member](const ResolvedConfig& c) { return std::string((c.*part).*member ? "true" : "false"); }};
}

inline const std::vector<Key>& keys() {
  using R = ResolvedConfig;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    k.push_back(number_key("env", "n_per_lane", &R::env, &EnvConfig::n_per_lane));
    k.push_back(number_key("env", "road_length_m", &R::env, &EnvConfig::road_length_m));
    k.push_back(number_key("env", "dt_s", &R::env, &EnvConfig::dt_s));
    k.push_back(number_key("env", "x_max_m", &R::env, &EnvConfig::x_max_m));
    k.push_back(number_key("env", "n_d", &R::env, &EnvConfig::n_d));
    k.push_back(number_key("env", "n_v", &R::env, &EnvConfig::n_v));
    k.push_back(number_key("env", "v_e_max_mps", &R::env, &EnvConfig::v_e_max_mps));
    k.push_back(number_key("env", "v_i_max_mps", &R::env, &EnvConfig::v_i_max_mps));
    k.push_back(number_key("env", "d_collision_m", &R::env, &EnvConfig::d_collision_m));
    k.push_back(number_key("env", "seed", &R::env, &EnvConfig::seed));
    k.push_back(number_key("env", "spawn_min_m", &R::env, &EnvConfig::spawn_min_m));
    k.push_back(number_key("env", "spawn_max_m", &R::env, &EnvConfig::spawn_max_m));
    k.push_back(number_key("env", "spawn_jitter_m", &R::env, &EnvConfig::spawn_jitter_m));
    k.push_back(number_key("env", "init_speed_min_mps", &R::env, &EnvConfig::init_speed_min_mps));
    k.push_back(bool_key("env", "include_ego_lane", &R::env, &EnvConfig::include_ego_lane));
    k.push_back(bool_key("env", "normalize_speed_penalty", &R::env, &EnvConfig::normalize_speed_penalty));

    k.push_back(number_key("params", "alpha", &R::params, &HyperParams::alpha));
    k.push_back(number_key("params", "beta", &R::params, &HyperParams::beta));
    k.push_back({"params", "epsilon",
                 [](R& c, std::string_view v, const std::string&) { c.params.epsilon = EpsilonSchedule::parse(v); },
                 [](const R& c) { return c.params.epsilon.label(); }});
    k.push_back(number_key("params", "episodes", &R::params, &HyperParams::episodes));
    k.push_back(number_key("params", "steps_per_episode", &R::params, &HyperParams::steps_per_episode));

    k.push_back({"experiment", "algo",
                 [](R& c, std::string_view v, const std::string&) { c.experiment.algo = parse_algorithm(trim(v)); },
                 [](const R& c) { return std::string(to_string(c.experiment.algo)); }});
    k.push_back(number_key("experiment", "replications", &R::experiment, &ExperimentConfig::replications));
    k.push_back(number_key("experiment", "threads", &R::experiment, &ExperimentConfig::threads));
    k.push_back(number_key("experiment", "eval_episodes", &R::experiment, &ExperimentConfig::eval_episodes));
    k.push_back({"experiment", "sweep",
                 [](R& c, std::string_view v, const std::string& what) {
                   v = trim(v);
                   if (v == "epsilon") {
                     c.experiment.sweep = SweepKind::epsilon;
                   } else if (v == "density") {
                     c.experiment.sweep = SweepKind::density;
                   } else {
                     throw ConfigError(what + ": expected epsilon or density");
                   }
                 },
                 [](const R& c) { return std::string(c.experiment.sweep == SweepKind::epsilon ? "epsilon" : "density"); }});
    k.push_back({"experiment", "schedules",
                 [](R& c, std::string_view v, const std::string&) {
                   c.experiment.schedules.clear();
                   if (trim(v).empty()) return;
                   for (const auto part : split(v, ',')) c.experiment.schedules.push_back(EpsilonSchedule::parse(part));
                 },
                 [](const R& c) {
                   std::string out;
                   for (const auto& s : c.experiment.schedules) out += (out.empty() ? "" : ",") + s.label();
                   return out;
                 }});
    k.push_back({"experiment", "densities",
                 [](R& c, std::string_view v, const std::string& what) {
                   c.experiment.densities.clear();
                   if (trim(v).empty()) return;
                   for (const auto part : split(v, ',')) c.experiment.densities.push_back(parse_number<int>(part, what));
                 },
                 [](const R& c) {
                   std::string out;
                   for (const int n : c.experiment.densities) out += (out.empty() ? "" : ",") + std::to_string(n);
                   return out;
                 }});
    return k;
  }();
  return table;
}

inline const Key* find_key(std::string_view section, std::string_view name) {
  for (const Key& k : keys()) {
    if (k.section == section && k.name == name) return &k;
  }
  return nullptr;
}

inline bool known_section(std::string_view s) { return s == "env" || s == "params" || s == "experiment"; }

}  // namespace config_detail

/// Sets one key. Unknown sections or keys are rejected.
inline void set_value(ResolvedConfig& config, std::string_view section, std::string_view name,
                      std::string_view value) {
  const auto* key = config_detail::find_key(section, name);
  if (key == nullptr) {
    throw ConfigError("unknown config key '" + std::string(section) + "." + std::string(name) + "'");
  }
  key->set(config, value, key->qualified());
}

/// Applies an INI document with sections env / params / experiment.
/// Lines starting with '#' or ';' are comments.
inline void apply_ini(ResolvedConfig& config, std::istream& in, const std::string& source = "config") {
  std::ostringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    cleaned << (t.starts_with('#') ? std::string_view{} : std::string_view(line)) << '\n';
  }
  std::istringstream text(cleaned.str());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(text, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(source + ": key '" + section + "' is outside any section");
    if (!config_detail::known_section(section)) throw ConfigError(source + ": unknown section [" + section + "]");
    for (const auto& [name, value] : body) set_value(config, section, name, value.data());
  }
}

inline void apply_ini_file(ResolvedConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path.string() + "'");
  apply_ini(config, in, path.string());
}

/// `section.key=value`, or `key=value` when the key name is unique.
inline void apply_override(ResolvedConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  const auto lhs = trim(assignment.substr(0, eq));
  const auto value = assignment.substr(eq + 1);
  const auto dot = lhs.find('.');
  if (dot != std::string_view::npos) {
    set_value(config, lhs.substr(0, dot), lhs.substr(dot + 1), value);
    return;
  }
  const config_detail::Key* match = nullptr;
  for (const auto& k : config_detail::keys()) {
    if (k.name != lhs) continue;
    if (match != nullptr) throw ConfigError("override key '" + std::string(lhs) + "' is ambiguous; use section.key");
    match = &k;
  }
  if (match == nullptr) throw ConfigError("unknown config key '" + std::string(lhs) + "'");
  match->set(config, value, match->qualified());
}

inline void write_ini(std::ostream& out, const ResolvedConfig& config) {
  std::string_view section;
  for (const auto& k : config_detail::keys()) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.name << " = " << k.get(config) << '\n';
  }
}

inline std::string to_ini(const ResolvedConfig& config) {
  std::ostringstream out;
  write_ini(out, config);
  return out.str();
}

}  // namespace overtake
