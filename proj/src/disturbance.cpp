#include "genewton/disturbance.hpp"

#include "genewton/rng.hpp"

#include <cmath>

namespace genewton {

DisturbanceSequence DisturbanceSequence::zero(int dim) {
  DisturbanceSequence d;
  d.kind_ = Kind::kZero;
  d.dim_ = dim;
  return d;
}

DisturbanceSequence DisturbanceSequence::constant(double c, int dim) {
  DisturbanceSequence d;
  d.kind_ = Kind::kConstant;
  d.dim_ = dim;
  d.sup_norm_ = std::abs(c);
  d.direction_ = Vector::Constant(dim, 1.0 / std::sqrt(double(dim)));
  if (c < 0) d.direction_ = -d.direction_;
  return d;
}

DisturbanceSequence DisturbanceSequence::decaying(double c, double rate,
                                                  int dim) {
  require(rate > 0.0 && rate < 1.0, "decaying disturbance: rate in (0,1)");
  DisturbanceSequence d = constant(c, dim);
  d.kind_ = Kind::kDecaying;
  d.rate_ = rate;
  return d;
}

DisturbanceSequence DisturbanceSequence::random_bounded(double delta, int dim,
                                                        std::uint64_t seed) {
  require(delta >= 0.0, "random disturbance: delta must be >= 0");
  DisturbanceSequence d;
  d.kind_ = Kind::kRandomBounded;
  d.dim_ = dim;
  d.sup_norm_ = delta;
  d.seed_ = seed;
  return d;
}

DisturbanceSequence DisturbanceSequence::custom(std::vector<Vector> values) {
  require(!values.empty(), "custom disturbance: need at least one value");
  DisturbanceSequence d;
  d.kind_ = Kind::kCustom;
  d.dim_ = static_cast<int>(values.front().size());
  for (const Vector& v : values) {
    require(v.size() == d.dim_, "custom disturbance: inconsistent dims");
    d.sup_norm_ = std::max(d.sup_norm_, v.norm());
  }
  d.values_ = std::move(values);
  return d;
}

Vector DisturbanceSequence::at(int k) const {
  require(k >= 0, "disturbance index must be >= 0");
  switch (kind_) {
    case Kind::kZero:
      return Vector::Zero(dim_);
    case Kind::kConstant:
      return sup_norm_ * direction_;
    case Kind::kDecaying:
      return sup_norm_ * std::pow(rate_, k) * direction_;
    case Kind::kRandomBounded: {
      Rng rng(Rng::mix(seed_, static_cast<std::uint64_t>(k)));
      return rng.ball(dim_, sup_norm_);
    }
    case Kind::kCustom:
      return k < static_cast<int>(values_.size()) ? values_[k]
                                                  : Vector::Zero(dim_);
  }
  return Vector::Zero(dim_);
}

}  // namespace genewton
