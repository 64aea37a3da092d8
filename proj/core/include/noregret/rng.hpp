#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace noregret {

using Rng = std::mt19937_64;

// Named sub-streams derived from a scenario or experiment root seed. Each
// consumer draws from its own stream so that, for example, changing the
// number of rollouts never perturbs the environment's reward noise.
enum class Stream : std::uint64_t {
  kProcessParams = 1,
  kRewardNoise = 2,
  kPerturbation = 3,
  kActionSampling = 4,
  kScenario = 5,
  kShuffle = 6,
  kInit = 7,
  kMonteCarlo = 8,
  kBaseline = 9,
  kProbe = 10,
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Deterministic child seed of `root` along a path of indices.
std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path) noexcept;

inline std::uint64_t derive_seed(std::uint64_t root, Stream s,
                                 std::initializer_list<std::uint64_t> path = {}) noexcept {
  std::uint64_t h = derive_seed(root, {static_cast<std::uint64_t>(s)});
  return derive_seed(h, path);
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

}  // namespace noregret
