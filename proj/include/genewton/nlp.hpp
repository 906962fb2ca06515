#pragma once

#include "genewton/geneq.hpp"
#include "genewton/multistep.hpp"
#include "genewton/trace.hpp"
#include "genewton/types.hpp"

#include <functional>
#include <optional>

namespace genewton {

// Equality-constrained nonlinear program  min_{x in C} h(x, v)
// subject to g(x, v) = 0, with the disturbance v entering through the
// problem data. Inequalities must be modeled through C or slacks.
struct NlpProblem {
  int dim_x = 0;
  int dim_g = 0;  // number of equality constraints
  int dim_v = 0;

  std::function<double(const Vector& x, const Vector& v)> h;
  std::function<Vector(const Vector& x, const Vector& v)> grad_h;
  std::function<Vector(const Vector& x, const Vector& v)> g;
  std::function<Matrix(const Vector& x, const Vector& v)> jac_g;
  Box feasible_set = Box::free(0);  // C
  // Hessian of the Lagrangian h + <g, y>; may be null (finite differences).
  std::function<Matrix(const Vector& x, const Vector& y, const Vector& v)>
      hess_lagrangian;

  std::optional<Vector> xbar, ybar;

  Vector grad_lagrangian(const Vector& x, const Vector& y,
                         const Vector& v) const;
  // Stacked KKT residual (grad_h + jac_g^T y, g).
  Vector kkt_residual(const Vector& x, const Vector& y, const Vector& v) const;
  Box kkt_cone() const;  // C x free duals
  Matrix kkt_matrix(const Vector& x, const Vector& y, const Vector& v) const;
  double kkt_residual_norm(const Vector& x, const Vector& y) const;
  void check_solution(double tol = 1e-8) const;
};

struct KktSystem {
  Vector residual;
  Box cone;
};

// KKT residual and cone at (x, y); the left-hand side of the stationarity
// inclusion in z = (x, y).
KktSystem assemble_kkt(const NlpProblem& nlp, const Vector& x, const Vector& y,
                       const Vector& v);

// Wraps the KKT system as a generalized equation in z = (x, y).
GeneralizedEquation make_kkt_geneq(const NlpProblem& nlp);

struct LicqReport {
  bool holds = false;
  double sigma_min = 0.0;
};

LicqReport licq_check(const NlpProblem& nlp, const Vector& x);

// Named linearizations for the KKT equation: exact second-order blocks
// and the zero-Hessian (sequential convexification) variant.
Linearization sqp_linearization(const NlpProblem& nlp);
Linearization convexification_linearization(const NlpProblem& nlp);

struct SqpStep {
  Vector x;
  Vector y;
  StepStatus status = StepStatus::kOk;
};

// Primal-dual step of the equality-constrained QP with Hessian stand-in B,
// solved as a mixed AVI in (x, y). With B equal to the exact Lagrangian
// Hessian this reproduces the exact Newton step on the KKT system.
SqpStep sqp_step(const NlpProblem& nlp, const Vector& x_k, const Vector& y_k,
                 const Matrix& b, const Vector& v_k,
                 const NewtonConfig& cfg = {});

struct HessianApprox {
  enum class Family { kBfgs, kDfp };

  Matrix b;
  Family family = Family::kBfgs;
  double curvature_skip_tol = 1e-8;
};

// One Broyden-class update; skipped (B unchanged) when the curvature
// yvec's < curvature_skip_tol * ||s|| * ||yvec||.
HessianApprox broyden_update(const HessianApprox& h, const Vector& s,
                             const Vector& yvec);

struct SqpConfig {
  NewtonConfig newton;
  HessianApprox::Family family = HessianApprox::Family::kBfgs;
  double curvature_skip_tol = 1e-8;
  // Steps below sqrt(eps) scale carry no usable curvature; keep B unchanged.
  double min_update_step = 1e-8;
  enum class B0Mode { kGiven, kScaledIdentity, kExactHessianAtStart };
  B0Mode b0_mode = B0Mode::kScaledIdentity;
  std::optional<Matrix> b0;
  bool exact_hessian = false;  // bypass the update, B_k = hess_L(x_k, y_k)
};

// Quasi-Newton SQP loop; extras record "b_error" per iterate when the exact
// Hessian is available.
Trace run_sqp(const NlpProblem& nlp, const Vector& x0, const Vector& y0,
              const DisturbanceSequence& dist, const SqpConfig& cfg = {});

struct AlmConfig {
  double rho = 10.0;  // penalty
  InnerMode inner = InnerMode::exact();
  int max_outer = 100;
  double tol = 1e-10;        // stop on the nominal KKT residual
  double inner_tol = 1e-10;
  int inner_max_iter = 50;
  NewtonConfig newton;       // subproblem settings
};

// Augmented-Lagrangian primal step: solves the penalized stationarity
// condition in x by the semismooth Newton machinery.
Vector alm_inner_solve(const NlpProblem& nlp, const Vector& y_k,
                       const Vector& v_k, const AlmConfig& cfg,
                       const Vector& x_warm);

// The ALM realized as a multistep problem: inner equation = penalized
// stationarity, H_y = [jac_g^T; -I/rho].
MultistepProblem make_alm_multistep(const NlpProblem& nlp, double rho);

// Alternates the primal minimization with y+ = y + rho g(x+, v). Extras
// record "dual_update_gap": the distance between the closed-form dual update
// and the partial-Newton inclusion solve, which coincide for the ALM.
Trace run_alm(const NlpProblem& nlp, const Vector& x0, const Vector& y0,
              const DisturbanceSequence& dist, const AlmConfig& cfg = {});

}  // namespace genewton
