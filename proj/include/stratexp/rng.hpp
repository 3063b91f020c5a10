#pragma once

#include <cstdint>
#include <random>

namespace stratexp {

using Rng = std::mt19937_64;

// Independent engine for (seed, stream); streams separate scenario, agent and
// learner randomness so that changing one consumer never shifts another.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace stratexp
