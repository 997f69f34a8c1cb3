#pragma once

// Deterministic seeded sampling: a scrambled Halton sequence for
// low-discrepancy initial conditions and a counter-based sub-seed scheme so
// that per-orbit randomness is independent of evaluation order.

#include <cmath>
#include <cstdint>

#include "zoll/types.hpp"

namespace zoll {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Sub-seed for job `index` under a master seed; order-independent.
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

/// Radical-inverse Halton point in dimension `dim` (prime bases), with a
/// seed-dependent index offset as scrambling.
class Halton {
 public:
  explicit Halton(std::uint64_t seed = 0)
      : offset_(splitmix64(seed) % 100003) {}

  double coordinate(std::uint64_t index, int dim) const {
    static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                     23, 29, 31, 37, 41, 43, 47, 53};
    std::uint64_t i = index + offset_ + 1;
    double base = primes[dim % 16];
    double inv = 1.0 / base, f = inv, x = 0.0;
    while (i > 0) {
      x += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
      i /= static_cast<std::uint64_t>(base);
      f *= inv;
    }
    return x;
  }

 private:
  std::uint64_t offset_;
};

/// Two independent standard normals from two uniforms (Box-Muller).
inline void box_muller(double u1, double u2, double& n1, double& n2) {
  u1 = std::max(u1, 1e-16);
  double r = std::sqrt(-2.0 * std::log(u1));
  n1 = r * std::cos(kTwoPi * u2);
  n2 = r * std::sin(kTwoPi * u2);
}

}  // namespace zoll
