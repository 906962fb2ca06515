#pragma once

#include "genewton/types.hpp"

namespace genewton {

inline constexpr double kMembershipTol = 1e-10;

// Generalized box [lower, upper]^n. Entries may be +-inf: a component with
// lower = -inf and upper = +inf is free (normal cone {0}); lower == upper
// pins the component (normal cone = all reals).
class Box {
 public:
  Box(Vector lower, Vector upper);

  static Box free(int dim);
  static Box nonnegative(int dim);
  static Box bounds(double lower, double upper, int dim);
  // Cartesian product, components of `a` first.
  static Box product(const Box& a, const Box& b);
  Box head(int n) const;
  Box tail(int n) const;

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  // Max componentwise distance outside the box (0 inside).
  double feasibility_violation(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTol) const;

 private:
  Vector lower_, upper_;
};

// Result of a normal-cone membership query w in N_C(x). margin <= tol iff
// membership holds; for points outside C the cone is empty and margin is the
// feasibility violation (positive).
struct NormalConeCertificate {
  Vector point;
  Vector direction;
  double margin = 0.0;
  bool feasible = false;
  bool member = false;
};

Vector project_box(const Vector& x, const Box& c);

NormalConeCertificate normal_cone_contains(const Box& c, const Vector& x,
                                           const Vector& w,
                                           double tol = kMembershipTol);

// r = z - proj_C(z - fz); r = 0 iff -fz in N_C(z).
Vector natural_residual(const Vector& z, const Vector& fz, const Box& c);

}  // namespace genewton
