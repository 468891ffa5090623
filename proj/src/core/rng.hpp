#pragma once

#include <cstdint>
#include <string_view>

namespace ewm {

// splitmix64 step: advances the state and returns the next output word.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent seed from (seed, stream). Adding streams never
// changes earlier ones, so candidate i's draws are stable as N grows.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Named stream derivation for reproducible sub-generators (init, shuffle, ...).
std::uint64_t mix_seed(std::uint64_t seed, std::string_view stream);

// Deterministic portable generator: splitmix64 state, Box-Muller normals.
// Output sequence depends only on the seed, not on platform or libstdc++.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  // Standard normal.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ewm
