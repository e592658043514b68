#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "overtake/config.hpp"
#include "overtake/errors.hpp"
#include "overtake/format.hpp"
#include "overtake/harness.hpp"
#include "overtake/io.hpp"
#include "overtake/trainer.hpp"
#include "overtake/trends.hpp"

namespace overtake {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

struct CliOptions {
  std::string command;
  std::string config_path;
  std::string output_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algo;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> replications;
  std::string qtable_path;
  std::string trajectory_path;
};

namespace cli_detail {

namespace fs = std::filesystem;

inline ResolvedConfig resolve(const CliOptions& o, std::ostream& out) {
  ResolvedConfig c;
  if (!o.config_path.empty()) apply_ini_file(c, o.config_path);
  for (const std::string& s : o.overrides) apply_override(c, s);
  if (o.seed) c.env.seed = *o.seed;
  if (o.algo) c.experiment.algo = parse_algorithm(*o.algo);
  if (o.episodes) {
    if (o.command == "eval") {
      c.experiment.eval_episodes = *o.episodes;
    } else {
      c.params.episodes = *o.episodes;
    }
  }
  if (o.replications) c.experiment.replications = *o.replications;
  c.validate();

  out << "config: defaults < " << (o.config_path.empty() ? "(no file)" : o.config_path) << " < "
      << o.overrides.size() << " override(s)\n";
  return c;
}

inline void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
}

template <class Writer>
void write_file(const fs::path& path, Writer&& write) {
  std::ofstream out = open_output(path);
  write(out);
  out.close();
  check_stream(out, path);
}

inline void write_resolved(const fs::path& dir, const ResolvedConfig& c) {
  prepare_dir(dir);
  write_file(dir / "resolved_config.ini", [&](std::ostream& out) { write_ini(out, c); });
}

inline void write_arm(const fs::path& dir, const ExperimentResult& r) {
  prepare_dir(dir);
  write_file(dir / "records.csv", [&](std::ostream& out) { write_records_csv(out, r.records); });
  write_file(dir / "summary.json", [&](std::ostream& out) { out << summary_json(r.summary).dump(2) << '\n'; });
}

inline std::string arm_dir_name(std::string label) {
  for (char& ch : label) {
    if (ch == ':' || ch == '=' || ch == '/') ch = '_';
  }
  return label;
}

inline void write_report(const fs::path& path, const std::vector<std::string>& lines, std::ostream& out) {
  write_file(path, [&](std::ostream& f) {
    for (const auto& l : lines) f << l << '\n';
  });
  for (const auto& l : lines) out << l << '\n';
}

inline int cmd_train(const CliOptions& o, std::ostream& out) {
  const ResolvedConfig c = resolve(o, out);
  const fs::path dir = o.output_dir;
  write_resolved(dir, c);

  const TrainResult result = train(c.env, c.experiment.algo, c.params, c.env.seed);
  const QTableHeader header = make_header(c.env, c.experiment.algo, c.params);
  write_file(dir / "qtable.csv", [&](std::ostream& f) { write_qtable(f, result.table, header); });
  write_file(dir / "records.csv", [&](std::ostream& f) { write_records_csv(f, RecordMatrix{result.records}); });

  // read the table back; a file that does not round-trip is a failed run
  std::ifstream in = open_input(dir / "qtable.csv");
  const auto [h, table] = read_qtable(in);
  if (!(h == header) || !(table == result.table)) throw IoError("qtable.csv did not read back identically");

  std::size_t collisions = 0;
  for (const auto& r : result.records) collisions += r.collision ? 1 : 0;
  out << to_string(c.experiment.algo) << ": " << result.records.size() << " episodes, " << collisions
      << " collisions, " << table.state_count() << " states visited\n";
  return kExitOk;
}

inline int cmd_eval(const CliOptions& o, std::ostream& out) {
  const ResolvedConfig c = resolve(o, out);
  const fs::path dir = o.output_dir;
  write_resolved(dir, c);

  std::ifstream in = open_input(o.qtable_path);
  const auto [header, table] = read_qtable(in);
  if (header.n_d != c.env.n_d || header.n_v != c.env.n_v || header.ego_lane != c.env.include_ego_lane) {
    throw ConfigError("qtable index sets (n_d=" + std::to_string(header.n_d) + ", n_v=" + std::to_string(header.n_v) +
                      ", ego_lane=" + (header.ego_lane ? "1" : "0") + ") do not match config (n_d=" +
                      std::to_string(c.env.n_d) + ", n_v=" + std::to_string(c.env.n_v) +
                      ", ego_lane=" + (c.env.include_ego_lane ? "1" : "0") + ")");
  }

  std::optional<std::ofstream> trajectory_file;
  std::optional<TrajectoryWriter> trajectory;
  if (!o.trajectory_path.empty()) {
    trajectory_file.emplace(open_output(o.trajectory_path));
    trajectory.emplace(*trajectory_file);
  }
  StepObserver on_step;
  if (trajectory) on_step = *trajectory;

  const auto records =
      evaluate_greedy(table, c.env, c.experiment.eval_episodes, c.params.steps_per_episode, c.env.seed, on_step);
  if (trajectory_file) {
    trajectory_file->close();
    check_stream(*trajectory_file, o.trajectory_path);
  }
  write_file(dir / "records.csv", [&](std::ostream& f) { write_records_csv(f, RecordMatrix{records}); });

  double collisions = 0.0;
  double distance = 0.0;
  double time = 0.0;
  for (const auto& r : records) {
    collisions += r.collision ? 1.0 : 0.0;
    distance += r.distance_m;
    time += r.consumed_time_s;
  }
  const double n = static_cast<double>(records.size());
  out << "episodes: " << records.size() << '\n'
      << "collision rate: " << format_double(collisions / n) << '\n'
      << "mean distance: " << format_double(distance / n) << " m\n"
      << "mean consumed time: " << format_double(time / n) << " s\n";
  return kExitOk;
}

inline int cmd_compare(const CliOptions& o, std::ostream& out) {
  const ResolvedConfig c = resolve(o, out);
  const fs::path dir = o.output_dir;
  write_resolved(dir, c);

  const PairedResult p = compare_algorithms(c.env, c.params, c.experiment.replications, c.env.seed,
                                            c.experiment.threads);
  write_arm(dir / "q-learning", p.q_learning);
  write_arm(dir / "sarsa", p.sarsa);
  write_report(dir / "trend_report.txt",
               {collisions_decline(p.q_learning.summary).line(), collisions_decline(p.sarsa.summary).line(),
                sarsa_succeeds_no_later(p).line()},
               out);
  return kExitOk;
}

inline int cmd_sweep(const CliOptions& o, std::ostream& out) {
  const ResolvedConfig c = resolve(o, out);
  const fs::path dir = o.output_dir;
  write_resolved(dir, c);

  const auto& x = c.experiment;
  std::vector<ExperimentResult> arms;
  std::vector<std::string> lines;
  if (x.sweep == SweepKind::epsilon) {
    arms = sweep_epsilon(c.env, c.params, x.algo, x.schedules, x.replications, c.env.seed, x.threads);
    const ExperimentResult* fixed = nullptr;
    const ExperimentResult* decaying = nullptr;
    for (const auto& a : arms) {
      if (!fixed && a.spec.params.epsilon.kind == EpsilonSchedule::Kind::fixed) fixed = &a;
      if (!decaying && a.spec.params.epsilon.kind == EpsilonSchedule::Kind::decay) decaying = &a;
    }
    if (fixed && decaying) lines.push_back(fixed_epsilon_collides_more(fixed->summary, decaying->summary).line());
  } else {
    arms = sweep_density(c.env, c.params, x.algo, x.densities, x.replications, c.env.seed, x.threads);
    if (arms.size() >= 2) {
      const auto lowest = std::min_element(arms.begin(), arms.end(), [](const auto& a, const auto& b) {
        return a.spec.env.n_per_lane < b.spec.env.n_per_lane;
      });
      const auto highest = std::max_element(arms.begin(), arms.end(), [](const auto& a, const auto& b) {
        return a.spec.env.n_per_lane < b.spec.env.n_per_lane;
      });
      if (lowest->spec.env.n_per_lane != highest->spec.env.n_per_lane) {
        lines.push_back(denser_traffic_takes_longer(lowest->summary, highest->summary).line() + " [best-effort]");
      }
    }
  }
  for (const auto& a : arms) {
    write_arm(dir / arm_dir_name(a.summary.label), a);
    lines.push_back(collisions_decline(a.summary).line());
  }
  write_report(dir / "trend_report.txt", lines, out);
  return kExitOk;
}

}  // namespace cli_detail

/// Entry point of the `overtake` tool. Returns 0 on success, 1 on a config
/// or usage error, 2 on an I/O error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliOptions o;
  CLI::App app{"Tabular Q-learning / Sarsa agents for two-lane highway overtaking", "overtake"};
  app.require_subcommand(1);

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI config file (sections env, params, experiment)");
    sub->add_option("--out", o.output_dir, "output directory")->required();
    sub->add_option("--seed", o.seed, "seed (overrides env.seed)");
    sub->add_option("--set", o.overrides, "override, section.key=value (repeatable)");
    sub->add_option("--algo", o.algo, "q-learning or sarsa");
    sub->add_option("--episodes", o.episodes, "episodes (training, or evaluation for eval)");
    sub->add_option("--replications", o.replications, "replications per arm");
  };
  common(app.add_subcommand("train", "train one agent, write qtable.csv and records.csv"));
  CLI::App* eval = app.add_subcommand("eval", "greedy rollouts of a saved qtable");
  common(eval);
  eval->add_option("--qtable", o.qtable_path, "qtable.csv from train")->required();
  eval->add_option("--trajectory", o.trajectory_path, "write the first episode step by step to this CSV");
  common(app.add_subcommand("compare", "Q-learning vs Sarsa over paired replications"));
  common(app.add_subcommand("sweep", "epsilon-schedule or traffic-density sweep"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "train") return cli_detail::cmd_train(o, out);
    if (o.command == "eval") return cli_detail::cmd_eval(o, out);
    if (o.command == "compare") return cli_detail::cmd_compare(o, out);
    return cli_detail::cmd_sweep(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace overtake
