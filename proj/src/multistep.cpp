#include "genewton/multistep.hpp"

#include "genewton/rng.hpp"

#include <chrono>
#include <cmath>

namespace genewton {

Vector MultistepProblem::eval(const Vector& x, const Vector& y,
                              const Vector& v) const {
  require(x.size() == dim_x && y.size() == dim_y && v.size() == dim_v,
          "MultistepProblem: dimension mismatch");
  Vector out = f(x, y, v);
  require(out.size() == dim_x + dim_y,
          "MultistepProblem: f must map into dim_x + dim_y");
  return out;
}

double MultistepProblem::residual_norm(const Vector& x, const Vector& y) const {
  Vector z(dim_x + dim_y);
  z << x, y;
  return natural_residual(z, eval(x, y, Vector::Zero(dim_v)), cone).norm();
}

namespace {

GeneralizedEquation inner_equation(const MultistepProblem& mp,
                                   const Vector& y_k, const Vector& v_k) {
  GeneralizedEquation ge;
  ge.dim_z = mp.dim_x;
  ge.dim_v = 0;
  ge.cone = mp.cone_tilde;
  ge.f = [&mp, y_k, v_k](const Vector& x, const Vector&) {
    return mp.f_tilde(x, y_k, v_k);
  };
  if (mp.jac_f_tilde) {
    ge.jacobian = [&mp, y_k, v_k](const Vector& x, const Vector&) {
      return mp.jac_f_tilde(x, y_k, v_k);
    };
  }
  return ge;
}

Vector inner_exact(const MultistepProblem& mp, const Vector& x_warm,
                   const Vector& y_k, const Vector& v_k,
                   const MultistepConfig& cfg) {
  const GeneralizedEquation ge = inner_equation(mp, y_k, v_k);
  NewtonConfig ncfg = cfg.newton;
  ncfg.tol = cfg.inner_tol;
  const Linearization lin = Linearization::exact_gradient();
  const Vector no_v = Vector::Zero(0);
  Vector x = x_warm;
  for (int it = 0; it < cfg.inner_max_iter; ++it) {
    if (ge.residual_norm(x) <= cfg.inner_tol) return x;
    x = josephy_newton_step(ge, lin, x, no_v, ncfg);
  }
  if (ge.residual_norm(x) <= cfg.inner_tol) return x;
  throw SolverError(SolverError::Code::kInnerSolveFailed,
                    "inner_solve: no convergence");
}

}  // namespace

InnerResult inner_solve(const MultistepProblem& mp, const Vector& x_warm,
                        const Vector& y_k, const Vector& v_k,
                        const InnerMode& mode, const MultistepConfig& cfg,
                        int step_index) {
  InnerResult res;
  switch (mode.kind) {
    case InnerMode::Kind::kExact: {
      res.x_next = inner_exact(mp, x_warm, y_k, v_k, cfg);
      res.inexactness = 0.0;
      return res;
    }
    case InnerMode::Kind::kNewtonSteps: {
      const GeneralizedEquation ge = inner_equation(mp, y_k, v_k);
      NewtonConfig ncfg = cfg.newton;
      const Linearization lin = Linearization::exact_gradient();
      const Vector no_v = Vector::Zero(0);
      Vector x = x_warm;
      for (int it = 0; it < mode.newton_steps; ++it) {
        x = josephy_newton_step(ge, lin, x, no_v, ncfg);
      }
      res.x_next = x;
      const Vector exact = inner_exact(mp, x, y_k, v_k, cfg);
      res.inexactness = (x - exact).norm();
      return res;
    }
    case InnerMode::Kind::kNoise: {
      const Vector exact = inner_exact(mp, x_warm, y_k, v_k, cfg);
      Rng rng(Rng::mix(mode.seed, static_cast<std::uint64_t>(step_index)));
      const Vector noise = rng.ball(mp.dim_x, mode.sigma);
      res.x_next = exact + noise;
      res.inexactness = noise.norm();
      return res;
    }
  }
  throw std::logic_error("inner_solve: unknown mode");
}

Vector inner_solve(const MultistepProblem& mp, const Vector& y_k,
                   const Vector& v_k, const InnerMode& mode,
                   const MultistepConfig& cfg) {
  const Vector warm = mp.xbar ? *mp.xbar : Vector::Zero(mp.dim_x);
  return inner_solve(mp, warm, y_k, v_k, mode, cfg, 0).x_next;
}

OuterResult outer_step(const MultistepProblem& mp, const Vector& x_next,
                       const Vector& y_k, const Vector& v_k,
                       const MultistepConfig& cfg) {
  const Vector fk = mp.eval(x_next, y_k, v_k);
  const Matrix hy = mp.h_y(x_next, y_k, v_k);
  require(hy.rows() == mp.dim_x + mp.dim_y && hy.cols() == mp.dim_y,
          "outer_step: H_y must be (dim_x + dim_y) x dim_y");

  // y-rows form a square AVI in y with the cone carried by the y-components.
  const Matrix my = hy.bottomRows(mp.dim_y);
  const Vector ay = fk.tail(mp.dim_y) - my * y_k;
  MixedAvi avi(ay, my, mp.cone.tail(mp.dim_y));

  OuterResult res;
  res.y_next = solve_avi_semismooth(avi, y_k, cfg.newton.subproblem_tol,
                                    cfg.newton.subproblem_max_iter);

  // The x-rows of the inclusion are not solved for; check them against the
  // normal cone at x_next and report the margin.
  const Vector res_x =
      fk.head(mp.dim_x) + hy.topRows(mp.dim_x) * (res.y_next - y_k);
  const NormalConeCertificate cert = normal_cone_contains(
      mp.cone.head(mp.dim_x), project_box(x_next, mp.cone.head(mp.dim_x)),
      -res_x, cfg.x_block_tol);
  res.x_block_margin = cert.margin;
  res.x_block_consistent = cert.member;
  return res;
}

Trace run_multistep(const MultistepProblem& mp, const Vector& x0,
                    const Vector& y0, const DisturbanceSequence& dist,
                    const MultistepConfig& cfg) {
  require(x0.size() == mp.dim_x && y0.size() == mp.dim_y,
          "run_multistep: start dimension mismatch");
  require(dist.dim() == mp.dim_v, "run_multistep: disturbance dimension");

  Trace trace;
  Vector x = x0, y = y0;
  auto joint = [&](const Vector& xx, const Vector& yy) {
    Vector z(mp.dim_x + mp.dim_y);
    z << xx, yy;
    return z;
  };
  auto record_iterate = [&](const Vector& xx, const Vector& yy) {
    trace.iterates.push_back(joint(xx, yy));
    const bool finite = xx.allFinite() && yy.allFinite();
    trace.residuals.push_back(finite ? mp.residual_norm(xx, yy) : kInf);
    if (mp.xbar && mp.ybar) {
      trace.errors_to_zbar.push_back(product_norm(xx - *mp.xbar, yy - *mp.ybar));
      trace.extras["x_error"].push_back((xx - *mp.xbar).norm());
      trace.extras["y_error"].push_back((yy - *mp.ybar).norm());
    }
  };
  record_iterate(x, y);

  for (int k = 0; k < cfg.newton.max_iter; ++k) {
    if (trace.residuals.back() <= cfg.newton.tol) break;
    if (joint(x, y).norm() > cfg.newton.divergence_norm) break;

    const Vector v = dist.at(k);
    const auto step_start = std::chrono::steady_clock::now();
    auto record_seconds = [&] {
      trace.extras["step_seconds"].push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        step_start)
              .count());
    };
    StepStatus status = StepStatus::kOk;
    try {
      const InnerResult inner = inner_solve(mp, x, y, v, cfg.inner, cfg, k);
      const OuterResult outer = outer_step(mp, inner.x_next, y, v, cfg);
      if (!outer.x_block_consistent) status = StepStatus::kXBlockGap;

      if (cfg.step_hook) {
        cfg.step_hook(k, inner.x_next, y, v, outer.y_next, trace);
      }
      x = inner.x_next;
      y = outer.y_next;
      trace.extras["inner_error"].push_back(inner.inexactness);
      trace.extras["x_block_margin"].push_back(outer.x_block_margin);
      record_seconds();
    } catch (const SolverError& err) {
      StepStatus s = StepStatus::kInnerSolveFailed;
      if (err.code() == SolverError::Code::kSingularPattern)
        s = StepStatus::kSingularPattern;
      else if (err.code() == SolverError::Code::kMaxIterExceeded)
        s = StepStatus::kMaxIterExceeded;
      record_seconds();
      trace.disturbances.push_back(v);
      trace.step_status.push_back(s);
      record_iterate(x, y);
      trace.validate();
      return trace;
    }

    trace.disturbances.push_back(v);
    if (!joint(x, y).allFinite() ||
        joint(x, y).norm() > cfg.newton.divergence_norm) {
      status = StepStatus::kDiverged;
    }
    trace.step_status.push_back(status);
    record_iterate(x, y);
    if (status == StepStatus::kDiverged) break;
  }
  trace.validate();
  return trace;
}

}  // namespace genewton
