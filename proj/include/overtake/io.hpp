#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "overtake/errors.hpp"
#include "overtake/format.hpp"
#include "overtake/harness.hpp"
#include "overtake/highway_env.hpp"
#include "overtake/q_table.hpp"
#include "overtake/td_learning.hpp"
#include "overtake/trainer.hpp"

namespace overtake {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

inline void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// --- records.csv -----------------------------------------------------------

inline constexpr std::string_view kRecordsHeader =
    "replication,episode,collision,distance_m,consumed_time_s,cumulative_reward,epsilon_used";

inline void write_records_csv(std::ostream& out, const RecordMatrix& records) {
  out << kRecordsHeader << '\n';
  for (std::size_t k = 0; k < records.size(); ++k) {
    for (const EpisodeRecord& r : records[k]) {
      out << k << ',' << r.episode << ',' << (r.collision ? 1 : 0) << ',' << format_double(r.distance_m) << ','
          << format_double(r.consumed_time_s) << ',' << format_double(r.cumulative_reward) << ','
          << format_double(r.epsilon_used) << '\n';
    }
  }
}

// --- trajectory dump -------------------------------------------------------

inline constexpr std::string_view kTrajectoryHeader = "step,x_e,v_e,lane,action_id,reward,terminal";

class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(std::ostream& out) : out_(&out) { *out_ << kTrajectoryHeader << '\n'; }

  void operator()(std::size_t step, ActionId action, const StepOutcome& o) const {
    *out_ << step << ',' << format_double(o.ego.position_m) << ',' << format_double(o.ego.velocity_mps) << ','
          << o.ego.lane << ',' << action.id() << ',' << format_double(o.reward) << ',' << to_string(o.terminal)
          << '\n';
  }

 private:
  std::ostream* out_;
};

// --- Q-table files ---------------------------------------------------------

/// Canonical text of the learning parameters; hashed into the table header.
inline std::string canonical_params(const HyperParams& p) {
  return "alpha=" + format_double(p.alpha) + ";beta=" + format_double(p.beta) + ";epsilon=" + p.epsilon.label() +
         ";episodes=" + std::to_string(p.episodes) + ";steps_per_episode=" + std::to_string(p.steps_per_episode);
}

inline std::uint64_t params_hash(const HyperParams& p) { return fnv1a(canonical_params(p)); }

struct QTableHeader {
  int n_d = 0;
  int n_v = 0;
  Algorithm algo = Algorithm::q_learning;
  std::uint64_t params_hash = 0;
  bool ego_lane = false;

  friend bool operator==(const QTableHeader&, const QTableHeader&) = default;
};

inline QTableHeader make_header(const EnvConfig& env, Algorithm algo, const HyperParams& params) {
  return {env.n_d, env.n_v, algo, params_hash(params), env.include_ego_lane};
}

/// Header line, then one `D1,D2,D3,D4,V1,V2,V3,V4[,L],action_id,value` row
/// per written entry, sorted by state key then action.
inline void write_qtable(std::ostream& out, const QTable& table, const QTableHeader& h) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(h.params_hash));
  out << "#qtable n_d=" << h.n_d << " n_v=" << h.n_v << " algo=" << to_string(h.algo) << " params_hash=" << hash
      << " ego_lane=" << (h.ego_lane ? 1 : 0) << '\n';
  for (const QTable::Entry& e : table.entries()) {
    const DiscreteState s = decode(e.key);
    for (const int d : s.d_index) out << d << ',';
    for (const int v : s.v_index) out << v << ',';
    if (h.ego_lane) out << s.ego_lane << ',';
    out << e.action.id() << ',' << format_double(e.value) << '\n';
  }
}

namespace detail {
inline std::string header_field(const std::string& line, std::string_view key) {
  const std::string tag = " " + std::string(key) + "=";
  const auto pos = line.find(tag);
  if (pos == std::string::npos) throw ConfigError("qtable header lacks '" + std::string(key) + "'");
  const auto start = pos + tag.size();
  return line.substr(start, line.find(' ', start) - start);
}
}  // namespace detail

inline std::pair<QTableHeader, QTable> read_qtable(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("#qtable", 0) != 0) throw ConfigError("not a qtable file (bad header)");
  QTableHeader h;
  h.n_d = parse_number<int>(detail::header_field(line, "n_d"), "qtable n_d");
  h.n_v = parse_number<int>(detail::header_field(line, "n_v"), "qtable n_v");
  h.algo = parse_algorithm(detail::header_field(line, "algo"));
  {
    const std::string hex = detail::header_field(line, "params_hash");
    const auto res = std::from_chars(hex.data(), hex.data() + hex.size(), h.params_hash, 16);
    if (res.ec != std::errc{} || res.ptr != hex.data() + hex.size()) throw ConfigError("qtable params_hash is not hex");
  }
  h.ego_lane = detail::header_field(line, "ego_lane") == "1";

  const std::size_t columns = 2 * kSlotCount + (h.ego_lane ? 1 : 0) + 2;
  QTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = "qtable line " + std::to_string(line_no);
    if (cells.size() != columns) throw ConfigError(where + ": expected " + std::to_string(columns) + " columns");
    DiscreteState s;
    std::size_t c = 0;
    for (int& d : s.d_index) {
      d = parse_number<int>(cells[c++], where);
      if (d < 0 || d > h.n_d) throw ConfigError(where + ": distance index out of [0, n_d]");
    }
    for (int& v : s.v_index) {
      v = parse_number<int>(cells[c++], where);
      if (v < 0 || v > h.n_v) throw ConfigError(where + ": speed index out of [0, n_v]");
    }
    if (h.ego_lane) {
      s.ego_lane = parse_number<int>(cells[c++], where);
      if (s.ego_lane < 1 || s.ego_lane > kLaneCount) throw ConfigError(where + ": lane out of range");
    }
    const int action = parse_number<int>(cells[c++], where);
    if (action < 1 || action > kActionCount) throw ConfigError(where + ": action id out of range");
    const double value = parse_number<double>(cells[c], where);
    if (!std::isfinite(value)) throw ConfigError(where + ": non-finite value");
    table.set(s, ActionId::from_id(action), value);
  }
  return {h, std::move(table)};
}

// --- summary.json ----------------------------------------------------------

inline nlohmann::ordered_json to_json(const FieldStats& s) {
  return {{"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

inline nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["label"] = s.label;
  j["replications"] = s.replications;
  j["episodes"] = s.episodes;
  j["window"] = s.window;
  j["mean_trailing_collision_rate"] = s.mean_trailing_collision_rate;
  j["mean_trailing_consumed_time_s"] = s.mean_trailing_consumed_time_s;
  j["median_first_success"] = s.median_first_success;
  auto& reps = j["per_replication"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < s.replications; ++k) {
    nlohmann::ordered_json r;
    r["replication"] = k;
    r["first_success"] = s.first_success[k] ? nlohmann::ordered_json(*s.first_success[k]) : nullptr;
    r["leading_collision_rate"] = s.leading_collision_rate[k];
    r["trailing_collision_rate"] = s.trailing_collision_rate[k];
    r["trailing_consumed_time_s"] = s.trailing_consumed_time_s[k];
    r["goal_reached"] = s.outcomes[k].goal_reached;
    r["collision"] = s.outcomes[k].collision;
    r["step_limit"] = s.outcomes[k].step_limit;
    reps.push_back(std::move(r));
  }
  auto& eps = j["per_episode"] = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < s.per_episode.size(); ++e) {
    const EpisodeAggregate& a = s.per_episode[e];
    eps.push_back({{"episode", e},
                   {"collision", to_json(a.collision)},
                   {"distance_m", to_json(a.distance_m)},
                   {"consumed_time_s", to_json(a.consumed_time_s)},
                   {"cumulative_reward", to_json(a.cumulative_reward)},
                   {"epsilon_used", to_json(a.epsilon_used)}});
  }
  return j;
}

}  // namespace overtake
