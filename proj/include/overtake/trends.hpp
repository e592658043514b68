#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "overtake/format.hpp"
#include "overtake/harness.hpp"

namespace overtake {

/// Ordinal claim about a pair of experiments and whether it held.
struct TrendVerdict {
  std::string name;
  bool held = false;
  std::string detail;

  std::string line() const { return name + ": " + (held ? "HELD" : "NOT HELD") + " (" + detail + ")"; }
};

/// Replications whose trailing-window collision rate is below the leading one.
inline std::size_t replications_with_fewer_late_collisions(const Summary& s) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.replications; ++k) {
    if (s.trailing_collision_rate[k] < s.leading_collision_rate[k]) ++n;
  }
  return n;
}

/// Learning to avoid collisions: holds when at least 80 % of replications
/// (16 of 20) collide less in the last window than in the first.
inline TrendVerdict collisions_decline(const Summary& s) {
  const std::size_t n = replications_with_fewer_late_collisions(s);
  const std::size_t needed = (s.replications * 4 + 4) / 5;
  return {s.label + " collisions decline", s.replications > 0 && n >= needed,
          std::to_string(n) + "/" + std::to_string(s.replications) + " replications, need " + std::to_string(needed)};
}

inline TrendVerdict sarsa_succeeds_no_later(const PairedResult& p) {
  const double q = p.q_learning.summary.median_first_success;
  const double s = p.sarsa.summary.median_first_success;
  return {"sarsa first success no later than q-learning", s <= q,
          "median first-success episode: sarsa " + format_double(s) + ", q-learning " + format_double(q)};
}

inline TrendVerdict fixed_epsilon_collides_more(const Summary& fixed, const Summary& decaying) {
  const double f = fixed.mean_trailing_collision_rate;
  const double d = decaying.mean_trailing_collision_rate;
  return {"fixed epsilon collides more than decaying epsilon", f > d,
          "trailing collision rate: " + fixed.label + " " + format_double(f) + ", " + decaying.label + " " +
              format_double(d)};
}

inline TrendVerdict denser_traffic_takes_longer(const Summary& sparse, const Summary& dense) {
  const double a = sparse.mean_trailing_consumed_time_s;
  const double b = dense.mean_trailing_consumed_time_s;
  return {"denser traffic takes longer", b > a,
          "trailing consumed time: " + sparse.label + " " + format_double(a) + " s, " + dense.label + " " +
              format_double(b) + " s"};
}

}  // namespace overtake
