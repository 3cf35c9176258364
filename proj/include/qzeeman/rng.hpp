#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "qzeeman/constants.hpp"

// Seeded random number generation with reproducible, platform-independent
// streams. Particle i of a run draws from its own stream derived from
// (seed, i), so results do not depend on how work is split across threads.

namespace qzeeman {

// SplitMix64 (Steele, Lea, Vigna); used to expand seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// xoshiro256++ (Blackman, Vigna), public-domain reference algorithm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Independent stream for a substream index (particle, sweep point, ...).
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t sm = seed;
    const std::uint64_t a = splitmix64(sm);
    sm = index ^ 0xd1342543de82ef95ull;
    const std::uint64_t b = splitmix64(sm);
    return Rng(a ^ (b + 0x9e3779b97f4a7c15ull * (index + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(constants::two_pi * u2);
    have_cached_ = true;
    return r * std::cos(constants::two_pi * u2);
  }

  // Uniform direction on the unit sphere.
  Eigen::Vector3d isotropic_direction() {
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, constants::two_pi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
  }

  // Uniform point inside a sphere of given radius about the origin.
  Eigen::Vector3d point_in_ball(double radius) {
    const double r = radius * std::cbrt(uniform());
    return r * isotropic_direction();
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace qzeeman
