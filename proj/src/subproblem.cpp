#include "genewton/subproblem.hpp"

#include "genewton/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace genewton {

MixedAvi::MixedAvi(Vector a_in, Matrix m_in, Box cone_in)
    : a(std::move(a_in)), m(std::move(m_in)), cone(std::move(cone_in)) {
  require(m.rows() == m.cols(), "MixedAvi: M must be square");
  require(a.size() == m.rows(), "MixedAvi: a and M dimensions differ");
  require(cone.dim() == a.size(), "MixedAvi: cone dimension differs");
}

namespace {

// Active pattern of the projection z -> proj(z - (a + Mz)). 1 marks an
// inactive (interior) component, 0 a clamped one. Boundary values count as
// inactive, matching the tie-break used by the enumeration oracle.
std::vector<int> projection_pattern(const MixedAvi& p, const Vector& z) {
  const Vector w = z - p.value(z);
  std::vector<int> d(p.dim());
  for (int i = 0; i < p.dim(); ++i) {
    d[i] = (w[i] >= p.cone.lower()[i] && w[i] <= p.cone.upper()[i]) ? 1 : 0;
  }
  return d;
}

Matrix pattern_jacobian(const MixedAvi& p, const std::vector<int>& d) {
  const int n = p.dim();
  Matrix j = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    if (d[i] == 1) j.row(i) = p.m.row(i);
  }
  return j;
}

}  // namespace

Vector solve_avi_semismooth(const MixedAvi& p, const Vector& z0, double tol,
                            int max_iter) {
  require(z0.size() == p.dim(), "solve_avi_semismooth: start dimension");
  require(z0.allFinite(), "solve_avi_semismooth: start not finite");
  require(tol > 0.0, "solve_avi_semismooth: tol must be positive");

  Vector z = z0;
  Vector r = p.residual(z);
  double rnorm = r.norm();

  for (int it = 0; it < max_iter; ++it) {
    if (rnorm <= tol) return z;

    const std::vector<int> d = projection_pattern(p, z);
    const Matrix j = pattern_jacobian(p, d);
    Eigen::FullPivLU<Matrix> lu(j);
    if (!lu.isInvertible()) {
      throw SolverError(SolverError::Code::kSingularPattern,
                        "solve_avi_semismooth: singular active-set system");
    }
    const Vector step = lu.solve(-r);

    // Damping: halve while the residual norm does not decrease.
    double t = 1.0;
    Vector z_next = z + step;
    Vector r_next = p.residual(z_next);
    while (r_next.norm() >= rnorm && t > 1e-12) {
      t *= 0.5;
      z_next = z + t * step;
      r_next = p.residual(z_next);
    }
    if (r_next.norm() >= rnorm) {
      throw SolverError(SolverError::Code::kMaxIterExceeded,
                        "solve_avi_semismooth: residual stalled");
    }
    z = z_next;
    r = r_next;
    rnorm = r.norm();
  }
  if (rnorm <= tol) return z;
  throw SolverError(SolverError::Code::kMaxIterExceeded,
                    "solve_avi_semismooth: max iterations exceeded");
}

namespace {

enum PatternCode { kInactive = 0, kAtLower = 1, kAtUpper = 2 };

}  // namespace

EnumerationResult solve_avi_enumerate(const MixedAvi& p, double tol) {
  const int n = p.dim();
  if (n > 8) {
    throw SolverError(SolverError::Code::kDimensionTooLarge,
                      "solve_avi_enumerate: dimension > 8");
  }

  EnumerationResult out;
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;

  std::vector<int> code(n);
  for (long pat = 0; pat < total; ++pat) {
    long rem = pat;
    bool valid = true;
    for (int i = 0; i < n; ++i) {
      code[i] = static_cast<int>(rem % 3);
      rem /= 3;
      if (code[i] == kAtLower && !std::isfinite(p.cone.lower()[i])) valid = false;
      if (code[i] == kAtUpper && !std::isfinite(p.cone.upper()[i])) valid = false;
      // Pinned components: 'at upper' duplicates 'at lower'.
      if (code[i] == kAtUpper && p.cone.lower()[i] == p.cone.upper()[i]) valid = false;
    }
    if (!valid) continue;

    std::vector<int> inactive;
    Vector z = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (code[i] == kAtLower) z[i] = p.cone.lower()[i];
      else if (code[i] == kAtUpper) z[i] = p.cone.upper()[i];
      else inactive.push_back(i);
    }

    if (!inactive.empty()) {
      const int ni = static_cast<int>(inactive.size());
      Matrix mii(ni, ni);
      Vector rhs(ni);
      for (int r = 0; r < ni; ++r) {
        rhs[r] = -p.a[inactive[r]];
        for (int c = 0; c < ni; ++c) mii(r, c) = p.m(inactive[r], inactive[c]);
        for (int i = 0; i < n; ++i) {
          if (code[i] != kInactive) rhs[r] -= p.m(inactive[r], i) * z[i];
        }
      }
      Eigen::FullPivLU<Matrix> lu(mii);
      if (!lu.isInvertible()) {
        ++out.singular_patterns;
        continue;
      }
      const Vector zi = lu.solve(rhs);
      for (int r = 0; r < ni; ++r) z[inactive[r]] = zi[r];
    }

    if (p.cone.feasibility_violation(z) > tol) continue;
    const Vector w = -p.value(z);
    if (!normal_cone_contains(p.cone, project_box(z, p.cone), w, tol).member) {
      continue;
    }

    bool duplicate = false;
    for (const Vector& s : out.solutions) {
      if ((s - z).norm() < 1e-9) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.solutions.push_back(z);
  }
  return out;
}

double RegularityEstimate::pattern_inverse_max() const {
  double m = 0.0;
  for (const auto& c : certificate) m = std::max(m, c.inverse_norm);
  return m;
}

namespace {

std::string pattern_string(const MixedAvi& p, const Vector& z) {
  const Vector w = z - p.value(z);
  std::string s(p.dim(), 'i');
  for (int i = 0; i < p.dim(); ++i) {
    if (w[i] < p.cone.lower()[i]) s[i] = 'l';
    else if (w[i] > p.cone.upper()[i]) s[i] = 'u';
  }
  return s;
}

double pattern_inverse_norm(const MixedAvi& p, const Vector& z) {
  std::vector<int> d(p.dim());
  const std::string s = pattern_string(p, z);
  for (int i = 0; i < p.dim(); ++i) d[i] = s[i] == 'i' ? 1 : 0;
  const Matrix j = pattern_jacobian(p, d);
  Eigen::JacobiSVD<Matrix> svd(j);
  const double smin = svd.singularValues().minCoeff();
  return smin > 0.0 ? 1.0 / smin : kInf;
}

}  // namespace

RegularityEstimate estimate_kappa(const MixedAvi& p, const Vector& zbar,
                                  double radius, int samples,
                                  std::uint64_t seed) {
  require(radius > 0.0, "estimate_kappa: radius must be positive");
  require(samples > 0, "estimate_kappa: need at least one sample");
  require(p.residual(zbar).norm() <= 1e-6,
          "estimate_kappa: zbar does not solve the AVI");

  RegularityEstimate est;
  est.sampled_radii = radius;

  std::vector<std::string> seen;
  auto record_pattern = [&](const Vector& z) {
    const std::string s = pattern_string(p, z);
    if (std::find(seen.begin(), seen.end(), s) == seen.end()) {
      seen.push_back(s);
      est.certificate.push_back({s, pattern_inverse_norm(p, z)});
    }
  };
  record_pattern(zbar);

  // Absolute tolerance scaled to the problem data; roundoff floors sit near
  // eps * |a| for badly scaled systems.
  const double solve_tol = 1e-13 * (1.0 + p.a.lpNorm<Eigen::Infinity>());

  for (int k = 0; k < samples; ++k) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(k)));
    const Vector delta = rng.ball(p.dim(), radius);
    if (delta.norm() == 0.0) continue;
    // 0 in a + Mz + N_C(z) - delta, i.e. rhs displaced by delta.
    MixedAvi shifted(p.a - delta, p.m, p.cone);
    const Vector z = solve_avi_semismooth(shifted, zbar, solve_tol, 100);
    est.kappa = std::max(est.kappa, (z - zbar).norm() / delta.norm());
    record_pattern(z);
  }
  return est;
}

}  // namespace genewton
