#include "genewton/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace genewton {

Box::Box(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), "Box: bound sizes differ");
  for (int i = 0; i < lower_.size(); ++i) {
    require(!(lower_[i] > upper_[i]), "Box: lower > upper");
    require(std::isfinite(lower_[i]) || std::isfinite(upper_[i]) ||
                lower_[i] != upper_[i],
            "Box: degenerate infinite component");
    require(!std::isnan(lower_[i]) && !std::isnan(upper_[i]),
            "Box: NaN bound");
  }
}

Box Box::free(int dim) {
  return Box(Vector::Constant(dim, -kInf), Vector::Constant(dim, kInf));
}

Box Box::nonnegative(int dim) {
  return Box(Vector::Zero(dim), Vector::Constant(dim, kInf));
}

Box Box::bounds(double lower, double upper, int dim) {
  return Box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
}

Box Box::product(const Box& a, const Box& b) {
  Vector l(a.dim() + b.dim()), u(a.dim() + b.dim());
  l << a.lower(), b.lower();
  u << a.upper(), b.upper();
  return Box(std::move(l), std::move(u));
}

Box Box::head(int n) const {
  return Box(lower_.head(n), upper_.head(n));
}

Box Box::tail(int n) const {
  return Box(lower_.tail(n), upper_.tail(n));
}

double Box::feasibility_violation(const Vector& x) const {
  require(x.size() == lower_.size(), "Box: dimension mismatch");
  double v = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < lower_[i]) v = std::max(v, lower_[i] - x[i]);
    if (x[i] > upper_[i]) v = std::max(v, x[i] - upper_[i]);
  }
  return v;
}

bool Box::contains(const Vector& x, double tol) const {
  return feasibility_violation(x) <= tol;
}

Vector project_box(const Vector& x, const Box& c) {
  require(x.size() == c.dim(), "project_box: dimension mismatch");
  return x.cwiseMax(c.lower()).cwiseMin(c.upper());
}

NormalConeCertificate normal_cone_contains(const Box& c, const Vector& x,
                                           const Vector& w, double tol) {
  require(x.size() == c.dim(), "normal_cone_contains: point dimension");
  require(w.size() == c.dim(), "normal_cone_contains: direction dimension");

  NormalConeCertificate cert;
  cert.point = x;
  cert.direction = w;

  const double infeas = c.feasibility_violation(x);
  if (infeas > tol) {
    // Empty cone outside C.
    cert.feasible = false;
    cert.member = false;
    cert.margin = infeas;
    return cert;
  }
  cert.feasible = true;

  double margin = -kInf;
  for (int i = 0; i < x.size(); ++i) {
    const double l = c.lower()[i];
    const double u = c.upper()[i];
    const bool at_lower = std::isfinite(l) && x[i] <= l + tol;
    const bool at_upper = std::isfinite(u) && x[i] >= u - tol;
    double violation;
    if (at_lower && at_upper) {
      violation = -std::abs(w[i]);  // pinned component, cone is all reals
    } else if (at_lower) {
      violation = w[i];  // cone (-inf, 0]
    } else if (at_upper) {
      violation = -w[i];  // cone [0, inf)
    } else {
      violation = std::abs(w[i]);  // interior or free, cone {0}
    }
    margin = std::max(margin, violation);
  }
  cert.margin = margin;
  cert.member = margin <= tol;
  return cert;
}

Vector natural_residual(const Vector& z, const Vector& fz, const Box& c) {
  require(z.size() == c.dim(), "natural_residual: point dimension");
  require(fz.size() == c.dim(), "natural_residual: value dimension");
  return z - project_box(z - fz, c);
}

}  // namespace genewton
