#pragma once

#include <cstdint>
#include <random>

namespace overtake {

using Rng = std::mt19937_64;

/// Independent RNG streams derived from one user seed.
enum class Stream : std::uint32_t {
  agent = 0xA6E7,
  environment = 0xE4F1,
  evaluation = 0xE7A1,
};

/// Mixes (seed, stream, index) through std::seed_seq into a fresh 64-bit seed.
/// Neighbouring indices give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(std::begin(words), std::end(words));
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, stream, index));
}

}  // namespace overtake
