#pragma once

#include "genewton/types.hpp"

#include <cstdint>
#include <vector>

namespace genewton {

// Disturbance sequence v = (v_0, v_1, ...) with known sup norm; every emitted
// v_k satisfies ||v_k|| <= sup_norm. Random draws are keyed on (seed, k) so
// access is deterministic and the same seed scales proportionally across the
// bound delta.
class DisturbanceSequence {
 public:
  enum class Kind { kZero, kConstant, kDecaying, kRandomBounded, kCustom };

  static DisturbanceSequence zero(int dim);
  static DisturbanceSequence constant(double c, int dim);
  static DisturbanceSequence decaying(double c, double rate, int dim);
  static DisturbanceSequence random_bounded(double delta, int dim,
                                            std::uint64_t seed);
  static DisturbanceSequence custom(std::vector<Vector> values);

  Vector at(int k) const;
  double sup_norm() const { return sup_norm_; }
  int dim() const { return dim_; }
  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

 private:
  DisturbanceSequence() = default;

  Kind kind_ = Kind::kZero;
  int dim_ = 0;
  double sup_norm_ = 0.0;
  double rate_ = 1.0;
  std::uint64_t seed_ = 0;
  Vector direction_;  // unit direction for constant/decaying kinds
  std::vector<Vector> values_;
};

}  // namespace genewton
