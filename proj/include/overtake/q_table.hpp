#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "overtake/errors.hpp"
#include "overtake/highway_env.hpp"

namespace overtake {

/// Hash key for a DiscreteState: eight 8-bit indices in `packed`, lane separate.
struct StateKey {
  std::uint64_t packed = 0;
  std::uint8_t ego_lane = 0;

  friend bool operator==(const StateKey&, const StateKey&) = default;
  friend auto operator<=>(const StateKey&, const StateKey&) = default;
};

inline StateKey encode(const DiscreteState& s) {
  StateKey key;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    key.packed |= static_cast<std::uint64_t>(s.d_index[i] & 0xFF) << (8 * i);
    key.packed |= static_cast<std::uint64_t>(s.v_index[i] & 0xFF) << (8 * (i + kSlotCount));
  }
  key.ego_lane = static_cast<std::uint8_t>(s.ego_lane);
  return key;
}

inline DiscreteState decode(const StateKey& key) {
  DiscreteState s;
  for (std::size_t i = 0; i < kSlotCount; ++i) {
    s.d_index[i] = static_cast<int>((key.packed >> (8 * i)) & 0xFF);
    s.v_index[i] = static_cast<int>((key.packed >> (8 * (i + kSlotCount))) & 0xFF);
  }
  s.ego_lane = key.ego_lane;
  return s;
}

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    // splitmix64 finalizer
    std::uint64_t z = k.packed ^ (static_cast<std::uint64_t>(k.ego_lane) << 61);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return static_cast<std::size_t>(z ^ (z >> 31));
  }
};

using ActionValues = std::array<double, kActionCount>;

/// Lowest-id argmax.
inline ActionId argmax(const ActionValues& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return ActionId::from_id(static_cast<int>(best) + 1);
}

/// Sparse action-value table. Unwritten (state, action) pairs read as 0.
class QTable {
 public:
  double value(const DiscreteState& s, ActionId a) const {
    const auto it = rows_.find(encode(s));
    return it == rows_.end() ? 0.0 : it->second.values[a.index()];
  }

  ActionValues values(const DiscreteState& s) const {
    const auto it = rows_.find(encode(s));
    return it == rows_.end() ? ActionValues{} : it->second.values;
  }

  double max_value(const DiscreteState& s) const {
    const ActionValues v = values(s);
    return *std::max_element(v.begin(), v.end());
  }

  ActionId best_action(const DiscreteState& s) const { return argmax(values(s)); }

  void set(const DiscreteState& s, ActionId a, double value) { set(encode(s), a, value); }

  void set(const StateKey& key, ActionId a, double value) {
    if (!std::isfinite(value)) throw NumericError("non-finite Q value");
    Row& row = rows_[key];
    row.values[a.index()] = value;
    row.written |= static_cast<std::uint8_t>(1u << a.index());
  }

  /// Number of (state, action) pairs ever written.
  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& [key, row] : rows_) n += static_cast<std::size_t>(std::popcount(row.written));
    return n;
  }

  std::size_t state_count() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  struct Entry {
    StateKey key;
    ActionId action;
    double value;
  };

  /// Written entries sorted by (state key, action id).
  std::vector<Entry> entries() const {
    std::vector<Entry> out;
    out.reserve(entry_count());
    for (const auto& [key, row] : rows_) {
      for (const ActionId a : all_actions()) {
        if (row.written & (1u << a.index())) out.push_back({key, a, row.values[a.index()]});
      }
    }
    std::sort(out.begin(), out.end(), [](const Entry& x, const Entry& y) {
      return x.key != y.key ? x.key < y.key : x.action.id() < y.action.id();
    });
    return out;
  }

  /// Exact equality over written entries (unwritten entries equal 0 on both sides).
  friend bool operator==(const QTable& x, const QTable& y) {
    const auto ex = x.entries();
    const auto ey = y.entries();
    return std::equal(ex.begin(), ex.end(), ey.begin(), ey.end(), [](const Entry& p, const Entry& q) {
      return p.key == q.key && p.action == q.action && p.value == q.value;
    });
  }

 private:
  struct Row {
    ActionValues values{};
    std::uint8_t written = 0;
  };
  std::unordered_map<StateKey, Row, StateKeyHash> rows_;
};

}  // namespace overtake
