#pragma once

#include "genewton/geneq.hpp"
#include "genewton/subproblem.hpp"
#include "genewton/trace.hpp"
#include "genewton/types.hpp"

#include <optional>
#include <vector>

namespace genewton {

// Fitted per-step bound e_{k+1} <= alpha e_k + gamma ||v_k|| with
// V(z) = ||z - zbar||. alpha is grid-searched over {0.01, ..., 0.99}; the
// feasible pair with minimal gamma wins, ties broken by smaller alpha.
struct IssEstimate {
  double alpha = 0.0;
  double gamma = 0.0;
  bool feasible = false;

  struct Witness {
    int k = 0;
    double lhs = 0.0;  // e_{k+1}
    double rhs = 0.0;  // alpha * e_k + gamma * ||v_k||
  };
  std::optional<Witness> violation_witness;

  // Radius of the asymptotic ball per unit ||v||_inf.
  double asymptotic_gain() const {
    return feasible ? gamma / (1.0 - alpha) : kInf;
  }
};

IssEstimate estimate_iss_gains(const std::vector<double>& errors,
                               const std::vector<double>& vnorms);
IssEstimate estimate_iss_gains(const Trace& trace, const Vector& zbar,
                               int first_step = 0);

struct QuadraticRateFit {
  double c = 0.0;  // e_{k+1} <= c e_k^2 + kappa_hat e_k ||v_k||
  int steps_used = 0;
  std::vector<double> per_step_gamma;  // kappa_hat * e_k along the window
  double alpha_ref = 1.0;              // linear contraction fitted alongside
  bool not_quadratic = false;
};

// Fits the quadratic constant over steps whose error interval
// [e_{k+1}, e_k] overlaps [e_lo, e_hi]. kappa_hat scales the disturbance
// term of the bound (0 for undisturbed traces). Throws
// SolverError(kInsufficientData) with fewer than 3 usable steps.
QuadraticRateFit fit_quadratic_rate(const Trace& trace, const Vector& zbar,
                                    double e_lo = 1e-8, double e_hi = 1e-2,
                                    double kappa_hat = 0.0);

struct BallContainmentEntry {
  double sup_norm = 0.0;
  double limsup_error = 0.0;  // max error over the final quarter of iterates
  double bound = 0.0;
  bool pass = false;
};

struct BallContainmentReport {
  std::vector<BallContainmentEntry> entries;
  // Ratio of mean limsup errors between adjacent positive disturbance levels
  // (ascending sup-norm order).
  std::vector<double> level_ratios;
  bool all_pass = false;
};

// Checks limsup ||z_k - zbar|| <= gamma_hat ||v||_inf (1 + slack) per trace;
// undisturbed traces are held to the solver tolerance instead.
BallContainmentReport ball_containment(const std::vector<Trace>& traces,
                                       const Vector& zbar, double gamma_hat,
                                       double slack = 0.10,
                                       double solver_tol = 1e-12);

struct SolutionMapProbe {
  Vector pbar1, pbar2;
  double lip_p1 = 0.0;  // finite-difference estimate of lip_{p1)(f)
  double lip_p2 = 0.0;
  double kappa_hat = 0.0;
  double mu_hat = 0.0;
  double omega = 0.0;  // kappa_hat / (1 - kappa_hat mu_hat)
  double ratio_p1 = 0.0;  // max ||s(p) - s(pbar)|| / ||p_i - pbar_i||
  double ratio_p2 = 0.0;
  bool bound_ok = false;  // ratios within omega * lip * (1 + slack)
  int solver_failures = 0;
};

struct ProbeOptions {
  double radius = 1e-2;    // parameter sampling radius per axis
  int samples = 100;       // per axis
  double slack = 0.10;
  double kappa_radius = 1e-4;
  int kappa_samples = 50;
  std::uint64_t seed = 0;
};

// Samples the solution map of a two-parameter generalized equation around
// pbar and checks the displacement ratios against the omega * lip bound.
SolutionMapProbe probe_solution_map(const ParametrizedGe& pge,
                                    const ProbeOptions& opts = {});

}  // namespace genewton
