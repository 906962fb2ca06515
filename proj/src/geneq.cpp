#include "genewton/geneq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

namespace genewton {

namespace {

Matrix finite_difference_jacobian(
    const std::function<Vector(const Vector&)>& fn, const Vector& z) {
  const double h = 1e-6 * (1.0 + z.norm());
  const int n = static_cast<int>(z.size());
  Vector zp = z, zm = z;
  Matrix j;
  for (int c = 0; c < n; ++c) {
    zp[c] += h;
    zm[c] -= h;
    const Vector dp = fn(zp);
    const Vector dm = fn(zm);
    if (c == 0) j.resize(dp.size(), n);
    j.col(c) = (dp - dm) / (2.0 * h);
    zp[c] = z[c];
    zm[c] = z[c];
  }
  return j;
}

}  // namespace

Vector GeneralizedEquation::eval(const Vector& z, const Vector& v) const {
  require(z.size() == dim_z, "GeneralizedEquation: z dimension mismatch");
  require(v.size() == dim_v, "GeneralizedEquation: v dimension mismatch");
  Vector out = f(z, v);
  require(out.size() == dim_z, "GeneralizedEquation: f must map into Z");
  return out;
}

Vector GeneralizedEquation::eval_nominal(const Vector& z) const {
  return eval(z, Vector::Zero(dim_v));
}

Matrix GeneralizedEquation::jac(const Vector& z, const Vector& v) const {
  if (jacobian) return jacobian(z, v);
  return finite_difference_jacobian(
      [&](const Vector& zz) { return f(zz, v); }, z);
}

double GeneralizedEquation::residual_norm(const Vector& z) const {
  return natural_residual(z, eval_nominal(z), cone).norm();
}

void GeneralizedEquation::check_zbar(double tol) const {
  if (!zbar) return;
  require(residual_norm(*zbar) <= tol,
          "GeneralizedEquation: zbar does not solve the equation");
}

Linearization Linearization::exact_gradient() {
  Linearization l;
  l.kind = Kind::kExactGradient;
  return l;
}

Linearization Linearization::gradient_plus_noise() {
  Linearization l;
  l.kind = Kind::kGradientPlusNoise;
  return l;
}

Linearization Linearization::zero_hessian() {
  Linearization l;
  l.kind = Kind::kZeroHessian;
  return l;
}

Linearization Linearization::scaled_identity(double alpha) {
  require(alpha > 0.0, "scaled_identity: alpha must be positive");
  Linearization l;
  l.kind = Kind::kScaledIdentity;
  l.alpha = alpha;
  return l;
}

Linearization Linearization::custom(
    std::function<Matrix(const GeneralizedEquation&, const Vector&,
                         const Vector&)>
        builder,
    Kind label) {
  Linearization l;
  l.kind = label;
  l.build = std::move(builder);
  return l;
}

Matrix Linearization::operator()(const GeneralizedEquation& ge, const Vector& z,
                                 const Vector& v) const {
  if (build) return build(ge, z, v);
  switch (kind) {
    case Kind::kExactGradient:
      return ge.jac(z, v);
    case Kind::kGradientPlusNoise: {
      require(v.size() == ge.dim_z * ge.dim_z,
              "gradient_plus_noise: v must hold a dim_z x dim_z matrix");
      Matrix noise = Eigen::Map<const Matrix>(v.data(), ge.dim_z, ge.dim_z);
      return ge.jac(z, Vector::Zero(ge.dim_v)) + noise;
    }
    case Kind::kZeroHessian:
      return Matrix::Zero(ge.dim_z, ge.dim_z);
    case Kind::kScaledIdentity:
      return Matrix::Identity(ge.dim_z, ge.dim_z) / alpha;
    default:
      throw std::invalid_argument("Linearization: missing builder");
  }
}

StepReport josephy_newton_step_report(const GeneralizedEquation& ge,
                                      const Linearization& lin,
                                      const Vector& z_k, const Vector& v_k,
                                      const NewtonConfig& cfg) {
  const Matrix h = lin(ge, z_k, v_k);
  require(h.rows() == ge.dim_z && h.cols() == ge.dim_z,
          "josephy_newton_step: H must be square of dim_z");
  const Vector fk = lin.disturbs_gradient()
                        ? ge.eval_nominal(z_k)
                        : ge.eval(z_k, v_k);

  MixedAvi avi(fk - h * z_k, h, ge.cone);
  StepReport rep;
  rep.z_next =
      solve_avi_semismooth(avi, z_k, cfg.subproblem_tol, cfg.subproblem_max_iter);
  if (cfg.enable_oracle && ge.dim_z <= std::min(cfg.oracle_dim_cap, 8)) {
    const EnumerationResult en = solve_avi_enumerate(avi);
    rep.oracle_solutions = static_cast<int>(en.solutions.size());
    if (rep.oracle_solutions > 1) rep.status = StepStatus::kNonUniqueSubproblem;
  }
  return rep;
}

Vector josephy_newton_step(const GeneralizedEquation& ge,
                           const Linearization& lin, const Vector& z_k,
                           const Vector& v_k, const NewtonConfig& cfg) {
  return josephy_newton_step_report(ge, lin, z_k, v_k, cfg).z_next;
}

Vector gradient_perturbed_step(const GeneralizedEquation& ge, const Vector& z_k,
                               const Matrix& v_k, const NewtonConfig& cfg) {
  require(v_k.rows() == ge.dim_z && v_k.cols() == ge.dim_z,
          "gradient_perturbed_step: v_k must be dim_z x dim_z");
  const Matrix h = ge.jac(z_k, Vector::Zero(ge.dim_v)) + v_k;
  const Vector fk = ge.eval_nominal(z_k);
  MixedAvi avi(fk - h * z_k, h, ge.cone);
  return solve_avi_semismooth(avi, z_k, cfg.subproblem_tol,
                              cfg.subproblem_max_iter);
}

Trace run_newton(const GeneralizedEquation& ge, const Linearization& lin,
                 const Vector& z0, const DisturbanceSequence& dist,
                 const NewtonConfig& cfg) {
  require(z0.allFinite(), "run_newton: start not finite");
  require(dist.dim() == (lin.disturbs_gradient() ? ge.dim_z * ge.dim_z
                                                 : ge.dim_v),
          "run_newton: disturbance dimension mismatch");

  Trace trace;
  Vector z = z0;
  trace.iterates.push_back(z);
  trace.residuals.push_back(ge.residual_norm(z));
  if (ge.zbar) trace.errors_to_zbar.push_back((z - *ge.zbar).norm());

  for (int k = 0; k < cfg.max_iter; ++k) {
    if (trace.residuals.back() <= cfg.tol) break;
    if (z.norm() > cfg.divergence_norm) {
      // Record the guard so the caller can tell a stopped run from a
      // converged one; no step is taken.
      break;
    }

    const Vector v = dist.at(k);
    const auto step_start = std::chrono::steady_clock::now();
    StepReport rep;
    try {
      if (lin.disturbs_gradient()) {
        Matrix noise = Eigen::Map<const Matrix>(v.data(), ge.dim_z, ge.dim_z);
        rep.z_next = gradient_perturbed_step(ge, z, noise, cfg);
        if (cfg.enable_oracle) {
          // Oracle check mirrors josephy_newton_step_report.
          const Matrix h = ge.jac(z, Vector::Zero(ge.dim_v)) + noise;
          MixedAvi avi(ge.eval_nominal(z) - h * z, h, ge.cone);
          if (ge.dim_z <= std::min(cfg.oracle_dim_cap, 8)) {
            const EnumerationResult en = solve_avi_enumerate(avi);
            rep.oracle_solutions = static_cast<int>(en.solutions.size());
            if (rep.oracle_solutions > 1)
              rep.status = StepStatus::kNonUniqueSubproblem;
          }
        }
      } else {
        rep = josephy_newton_step_report(ge, lin, z, v, cfg);
      }
    } catch (const SolverError& err) {
      StepStatus s = StepStatus::kMaxIterExceeded;
      if (err.code() == SolverError::Code::kSingularPattern)
        s = StepStatus::kSingularPattern;
      trace.iterates.push_back(z);
      trace.disturbances.push_back(v);
      trace.residuals.push_back(trace.residuals.back());
      trace.step_status.push_back(s);
      if (ge.zbar) trace.errors_to_zbar.push_back((z - *ge.zbar).norm());
      trace.extras["step_seconds"].push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        step_start)
              .count());
      break;
    }

    z = rep.z_next;
    if (!z.allFinite() || z.norm() > cfg.divergence_norm) {
      rep.status = StepStatus::kDiverged;
    }
    trace.iterates.push_back(z);
    trace.disturbances.push_back(v);
    trace.residuals.push_back(z.allFinite() ? ge.residual_norm(z) : kInf);
    trace.step_status.push_back(rep.status);
    if (ge.zbar) trace.errors_to_zbar.push_back((z - *ge.zbar).norm());
    trace.extras["step_seconds"].push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      step_start)
            .count());
    if (rep.status == StepStatus::kDiverged) break;
  }
  trace.validate();
  return trace;
}

Matrix ParametrizedGe::jac(const Vector& z, const Vector& p1,
                           const Vector& p2) const {
  if (jacobian) return jacobian(z, p1, p2);
  return finite_difference_jacobian(
      [&](const Vector& zz) { return f(zz, p1, p2); }, z);
}

Vector ParametrizedGe::solve(const Vector& p1, const Vector& p2,
                             const Vector& z_init,
                             const NewtonConfig& cfg) const {
  GeneralizedEquation ge;
  ge.dim_z = dim_z;
  ge.dim_v = 0;
  ge.cone = cone;
  ge.f = [this, p1, p2](const Vector& z, const Vector&) {
    return f(z, p1, p2);
  };
  if (jacobian) {
    ge.jacobian = [this, p1, p2](const Vector& z, const Vector&) {
      return jacobian(z, p1, p2);
    };
  }

  Vector z = z_init;
  const Linearization lin = Linearization::exact_gradient();
  const Vector no_v = Vector::Zero(0);
  for (int k = 0; k < cfg.max_iter; ++k) {
    if (ge.residual_norm(z) <= cfg.tol) return z;
    z = josephy_newton_step(ge, lin, z, no_v, cfg);
  }
  if (ge.residual_norm(z) <= cfg.tol) return z;
  throw SolverError(SolverError::Code::kMaxIterExceeded,
                    "ParametrizedGe::solve: no convergence");
}

}  // namespace genewton
