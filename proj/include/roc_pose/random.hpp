#pragma once

#include <cstdint>
#include <random>

#include "roc_pose/geometry.hpp"

namespace roc_pose {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent stream seeds from (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec3 random_unit_vector(Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

// Uniformly distributed rotation (Haar measure) via a random unit quaternion.
inline Mat3 random_rotation(Rng &rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    if (q.norm() > 1e-12) return q.normalized().toRotationMatrix();
  }
}

}  // namespace roc_pose
