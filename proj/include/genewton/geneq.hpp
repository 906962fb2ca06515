#pragma once

#include "genewton/disturbance.hpp"
#include "genewton/geometry.hpp"
#include "genewton/subproblem.hpp"
#include "genewton/trace.hpp"
#include "genewton/types.hpp"

#include <functional>
#include <optional>

namespace genewton {

// Generalized equation  0 in f(z, v) + N_C(z)  with disturbance input v.
// The Jacobian is optional; a central finite difference with step
// 1e-6 * (1 + ||z||) is used when absent.
struct GeneralizedEquation {
  int dim_z = 0;
  int dim_v = 0;
  std::function<Vector(const Vector& z, const Vector& v)> f;
  std::function<Matrix(const Vector& z, const Vector& v)> jacobian;  // may be null
  Box cone = Box::free(0);
  std::optional<Vector> zbar;

  Vector eval(const Vector& z, const Vector& v) const;
  Vector eval_nominal(const Vector& z) const;
  Matrix jac(const Vector& z, const Vector& v) const;
  // || natural_residual(z, f(z,0), C) ||, the convergence metric.
  double residual_norm(const Vector& z) const;
  void check_zbar(double tol = 1e-8) const;
};

// Builds the operator H(z, v) of one linearized step. The named kinds cover
// the standard strategies; kCustom takes a user builder.
struct Linearization {
  enum class Kind {
    kExactGradient,
    kGradientPlusNoise,  // H = jac(z, 0) + mat(v), f evaluated undisturbed
    kSqpHessian,
    kZeroHessian,
    kScaledIdentity,  // H = I / alpha
    kCustom,
  };

  Kind kind = Kind::kExactGradient;
  double alpha = 0.0;
  std::function<Matrix(const GeneralizedEquation&, const Vector& z,
                       const Vector& v)>
      build;

  static Linearization exact_gradient();
  static Linearization gradient_plus_noise();
  static Linearization zero_hessian();
  static Linearization scaled_identity(double alpha);
  static Linearization custom(
      std::function<Matrix(const GeneralizedEquation&, const Vector&,
                           const Vector&)> builder,
      Kind label = Kind::kCustom);

  Matrix operator()(const GeneralizedEquation& ge, const Vector& z,
                    const Vector& v) const;
  // The gradient-noise kind evaluates f without the disturbance.
  bool disturbs_gradient() const { return kind == Kind::kGradientPlusNoise; }
};

struct NewtonConfig {
  double tol = 1e-12;              // stop when the nominal residual is below
  int max_iter = 50;
  double subproblem_tol = 1e-12;
  int subproblem_max_iter = 200;
  double divergence_norm = 1e6;
  bool enable_oracle = false;      // enumeration cross-check per step
  int oracle_dim_cap = 6;
  // Local-neighbourhood radii assumed by the ISS analysis; echoed into reports.
  double neighborhood_epsilon = 1.0;
  double neighborhood_delta = 0.1;
};

struct StepReport {
  Vector z_next;
  StepStatus status = StepStatus::kOk;
  int oracle_solutions = -1;  // -1 when the oracle did not run
};

// One Josephy-Newton step: solve 0 in f(z_k,v_k) + H(z_k,v_k)(z - z_k) + N_C(z).
Vector josephy_newton_step(const GeneralizedEquation& ge,
                           const Linearization& lin, const Vector& z_k,
                           const Vector& v_k, const NewtonConfig& cfg = {});
StepReport josephy_newton_step_report(const GeneralizedEquation& ge,
                                      const Linearization& lin,
                                      const Vector& z_k, const Vector& v_k,
                                      const NewtonConfig& cfg = {});

// Gradient-perturbed step: 0 in f(z_k) + (jac(z_k) + v_k)(z - z_k) + N_C(z).
Vector gradient_perturbed_step(const GeneralizedEquation& ge, const Vector& z_k,
                               const Matrix& v_k, const NewtonConfig& cfg = {});

Trace run_newton(const GeneralizedEquation& ge, const Linearization& lin,
                 const Vector& z0, const DisturbanceSequence& dist,
                 const NewtonConfig& cfg = {});

// A generalized equation 0 in f(z, p1, p2) + N_C(z) with two parameter axes,
// probed by the solution-map estimators.
struct ParametrizedGe {
  int dim_z = 0;
  int dim_p1 = 0;
  int dim_p2 = 0;
  std::function<Vector(const Vector& z, const Vector& p1, const Vector& p2)> f;
  std::function<Matrix(const Vector& z, const Vector& p1, const Vector& p2)>
      jacobian;  // may be null
  Box cone = Box::free(0);
  Vector pbar1, pbar2;
  Vector zbar;

  Matrix jac(const Vector& z, const Vector& p1, const Vector& p2) const;
  // Solves at parameter (p1, p2) by Josephy-Newton warm-started from z_init.
  Vector solve(const Vector& p1, const Vector& p2, const Vector& z_init,
               const NewtonConfig& cfg = {}) const;
};

}  // namespace genewton
