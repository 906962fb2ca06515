#include "genewton/rng.hpp"

#include <cmath>

namespace genewton {

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::gaussian() {
  // Box-Muller; discard the second variate to keep the stream simple.
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

Vector Rng::unit(int dim) {
  Vector g(dim);
  for (int i = 0; i < dim; ++i) g[i] = gaussian();
  double n = g.norm();
  while (n == 0.0) {
    for (int i = 0; i < dim; ++i) g[i] = gaussian();
    n = g.norm();
  }
  return g / n;
}

Vector Rng::ball(int dim, double radius) {
  const double r = radius * std::pow(uniform01(), 1.0 / dim);
  return r * unit(dim);
}

}  // namespace genewton
