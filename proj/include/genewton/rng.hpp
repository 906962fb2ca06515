#pragma once

#include "genewton/types.hpp"

#include <cstdint>

namespace genewton {

// Deterministic stream of doubles, independent of the standard library's
// distribution implementations so outputs are stable across toolchains.
// splitmix64 over a counter; supports cheap random access by key.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {}

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

  std::uint64_t next_u64();
  double uniform01();                       // [0, 1)
  double uniform(double lo, double hi);
  double gaussian();                        // Box-Muller, deterministic

  // Uniform draw from the closed Euclidean ball of given radius.
  Vector ball(int dim, double radius);
  // Gaussian direction of unit norm.
  Vector unit(int dim);

 private:
  std::uint64_t state_;
};

}  // namespace genewton
