#pragma once

#include "genewton/geometry.hpp"
#include "genewton/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace genewton {

// Mixed affine variational inequality  0 in a + M z + N_C(z).
// This is the target of every linearized Newton step.
struct MixedAvi {
  Vector a;
  Matrix m;
  Box cone;

  MixedAvi(Vector a_in, Matrix m_in, Box cone_in);

  int dim() const { return static_cast<int>(a.size()); }
  Vector value(const Vector& z) const { return a + m * z; }
  Vector residual(const Vector& z) const {
    return natural_residual(z, value(z), cone);
  }
};

// Semismooth Newton on the natural-residual map. The generalized derivative
// follows the active-component pattern of the projection; steps are damped by
// halving while the residual norm does not decrease.
//
// Throws SolverError(kMaxIterExceeded) when the residual stalls and
// SolverError(kSingularPattern) when an active-set linear system is singular.
Vector solve_avi_semismooth(const MixedAvi& p, const Vector& z0,
                            double tol = 1e-12, int max_iter = 100);

struct EnumerationResult {
  std::vector<Vector> solutions;
  // Patterns whose reduced linear system was singular (skipped). A nonzero
  // count on an all-inactive pattern signals a degenerate interior.
  int singular_patterns = 0;
};

// Brute-force oracle: enumerate the 3^n active-set patterns (at-lower,
// at-upper, inactive per component), solve the reduced linear system and keep
// solutions certified by normal_cone_contains. Requires dim <= 8.
EnumerationResult solve_avi_enumerate(const MixedAvi& p, double tol = 1e-9);

struct PatternInverse {
  std::string pattern;  // one char per component: 'l', 'u' or 'i'
  double inverse_norm = 0.0;
};

// Sampled estimate of the strong-regularity constant; a lower bound on the
// true localization constant, reported as such.
struct RegularityEstimate {
  double kappa = 0.0;          // max ||z(d) - zbar|| / ||d|| over samples
  double sampled_radii = 0.0;  // radius of the rhs perturbation ball
  std::vector<PatternInverse> certificate;

  double pattern_inverse_max() const;
};

RegularityEstimate estimate_kappa(const MixedAvi& p, const Vector& zbar,
                                  double radius, int samples,
                                  std::uint64_t seed = 0);

}  // namespace genewton
