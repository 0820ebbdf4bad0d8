#pragma once

#include <cstdint>

namespace mvi {

// Counter-based splittable RNG (splitmix64 core). Every consumer of
// randomness in this project derives its own stream from a single master
// seed via split(); streams derived with distinct keys are independent,
// and a stream's output depends only on (seed, key-path), never on how
// much another stream consumed. This is what makes multi-worker runs
// bit-identical to single-worker runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform in [0, bound). bound = 0 returns 0.
  std::uint32_t next_below(std::uint32_t bound) {
    if (bound == 0) return 0;
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(next_u64() >> 32)) * bound) >> 32);
  }

  // Child stream identified by `key`, independent of this stream's position.
  Rng split(std::uint64_t key) const {
    return Rng(mix(state_ ^ mix(key + 0x9e3779b97f4a7c15ULL)));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Stable seed derivation for named sub-streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) {
  return Rng::mix(seed ^ Rng::mix(key + 0x9e3779b97f4a7c15ULL));
}

}  // namespace mvi
