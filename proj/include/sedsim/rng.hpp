#pragma once

#include <cstdint>

#include "sedsim/vec3.hpp"

namespace sedsim {

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Mixes a master seed with an index into an independent stream key.
///   derive_seed(m, i) = mix(m ^ mix(i + gamma))
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64_mix(master ^ splitmix64_mix(index + kGoldenGamma));
}

/// Counter-based stream: draw i is mix(key + (i + 1) * gamma), i.e. SplitMix64
/// evaluated at an arbitrary position. The whole generator state is (key, counter),
/// which makes checkpointing and random access trivial.
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
      : key_(key), counter_(counter) {}

  static constexpr std::uint64_t bits_at(std::uint64_t key, std::uint64_t i) {
    return splitmix64_mix(key + (i + 1) * kGoldenGamma);
  }
  /// Uniform in (0, 1): 53 random bits offset by half an ulp, never 0 or 1.
  static constexpr double uniform_at(std::uint64_t key, std::uint64_t i) {
    return (static_cast<double>(bits_at(key, i) >> 11) + 0.5) * 0x1.0p-53;
  }
  /// Two independent standard normals from draws (2i, 2i+1) via Box-Muller.
  static void normal_pair_at(std::uint64_t key, std::uint64_t i, double& g0, double& g1);

  std::uint64_t next_bits() { return bits_at(key_, counter_++); }
  double uniform() { return uniform_at(key_, counter_++); }
  double normal();
  /// Uniform direction on the unit sphere.
  Vec3 unit_vector();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace sedsim
