#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "overtake/config.hpp"
#include "overtake/io.hpp"

using namespace overtake;

TEST(Config, DefaultsValidate) {
  ResolvedConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.params.alpha, 0.9);
  EXPECT_EQ(c.params.beta, 0.2);
  EXPECT_EQ(c.params.episodes, 200u);
  EXPECT_EQ(c.params.steps_per_episode, 1000u);
  EXPECT_EQ(c.env.road_length_m, 1000.0);
}

TEST(Config, IniSectionsAndComments) {
  std::istringstream in(
      "# sample\n"
      "[env]\n"
      "n_per_lane = 10\n"
      "include_ego_lane = true\n"
      "; another comment\n"
      "[params]\n"
      "alpha = 0.5\n"
      "epsilon = fixed:0.1\n"
      "[experiment]\n"
      "algo = sarsa\n"
      "schedules = fixed:0.1, decay:0.2:0.9\n");
  ResolvedConfig c;
  apply_ini(c, in);
  EXPECT_EQ(c.env.n_per_lane, 10);
  EXPECT_TRUE(c.env.include_ego_lane);
  EXPECT_EQ(c.params.alpha, 0.5);
  EXPECT_EQ(c.params.epsilon, EpsilonSchedule::fixed(0.1));
  EXPECT_EQ(c.experiment.algo, Algorithm::sarsa);
  ASSERT_EQ(c.experiment.schedules.size(), 2u);
  EXPECT_EQ(c.experiment.schedules[1], EpsilonSchedule::decay(0.2, 0.9));
}

TEST(Config, UnknownKeysAreRejected) {
  ResolvedConfig c;
  std::istringstream bad_key("[env]\nlanes = 3\n");
  EXPECT_THROW(apply_ini(c, bad_key), ConfigError);
  std::istringstream bad_section("[agent]\nalpha = 0.1\n");
  EXPECT_THROW(apply_ini(c, bad_section), ConfigError);
  EXPECT_THROW(apply_override(c, "params.gamma=0.1"), ConfigError);
  EXPECT_THROW(apply_override(c, "nonsense"), ConfigError);
}

TEST(Config, BadValuesAreRejected) {
  ResolvedConfig c;
  EXPECT_THROW(apply_override(c, "env.n_d=ten"), ConfigError);
  EXPECT_THROW(apply_override(c, "env.include_ego_lane=maybe"), ConfigError);
  EXPECT_THROW(apply_override(c, "experiment.sweep=grid"), ConfigError);
  apply_override(c, "params.alpha=1.5");
  try {
    c.validate();
    FAIL() << "alpha = 1.5 accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("params.alpha"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("[0, 1]"), std::string::npos);
  }
}

TEST(Config, OverridesQualifiedAndBare) {
  ResolvedConfig c;
  apply_override(c, "env.x_max_m=100");
  apply_override(c, "n_d=10");
  apply_override(c, "beta = 0.5");
  EXPECT_EQ(c.env.x_max_m, 100.0);
  EXPECT_EQ(c.env.n_d, 10);
  EXPECT_EQ(c.params.beta, 0.5);
  apply_override(c, "experiment.schedules=");
  EXPECT_TRUE(c.experiment.schedules.empty());
}

TEST(Config, OverridesBeatFile) {
  ResolvedConfig c;
  std::istringstream in("[params]\nalpha = 0.3\nepisodes = 10\n");
  apply_ini(c, in);
  apply_override(c, "params.alpha=0.4");
  EXPECT_EQ(c.params.alpha, 0.4);
  EXPECT_EQ(c.params.episodes, 10u);
}

TEST(Config, ResolvedIniRoundTrips) {
  ResolvedConfig c;
  apply_override(c, "env.seed=77");
  apply_override(c, "params.epsilon=decay:0.2:0.95:step");
  apply_override(c, "experiment.densities=3,8");
  apply_override(c, "env.dt_s=0.1");
  const std::string text = to_ini(c);
  ResolvedConfig back;
  std::istringstream in(text);
  apply_ini(back, in);
  EXPECT_EQ(to_ini(back), text);
  EXPECT_EQ(back.env.seed, 77u);
  EXPECT_EQ(back.env.dt_s, 0.1);
  EXPECT_EQ(back.params.epsilon.unit, EpsilonSchedule::Unit::step);
}

TEST(Records, CsvSchema) {
  EpisodeRecord r;
  r.episode = 3;
  r.collision = true;
  r.distance_m = 12.5;
  r.consumed_time_s = 4;
  r.cumulative_reward = -101.25;
  r.epsilon_used = 0.1;
  std::ostringstream out;
  write_records_csv(out, RecordMatrix{{r}});
  EXPECT_EQ(out.str(),
            "replication,episode,collision,distance_m,consumed_time_s,cumulative_reward,epsilon_used\n"
            "0,3,1,12.5,4,-101.25,0.1\n");
}

TEST(Trajectory, CsvSchema) {
  std::ostringstream out;
  TrajectoryWriter w(out);
  StepOutcome o;
  o.ego = VehicleState{10.5, 11.0, 1.0, 2};
  o.reward = -1.5;
  o.terminal = Terminal::running;
  w(1, ActionId::from_id(4), o);
  EXPECT_EQ(out.str(), "step,x_e,v_e,lane,action_id,reward,terminal\n1,10.5,11,2,4,-1.5,running\n");
}

TEST(Format, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, -19.8, 1e-300, 123456789.0}) {
    EXPECT_EQ(parse_number<double>(format_double(x), "x"), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(ParamsHash, DependsOnParameters) {
  HyperParams a, b;
  b.alpha = 0.8;
  EXPECT_NE(params_hash(a), params_hash(b));
  EXPECT_EQ(params_hash(a), params_hash(HyperParams{}));
}
