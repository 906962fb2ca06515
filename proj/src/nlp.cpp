#include "genewton/nlp.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>

namespace genewton {

Vector NlpProblem::grad_lagrangian(const Vector& x, const Vector& y,
                                   const Vector& v) const {
  return grad_h(x, v) + jac_g(x, v).transpose() * y;
}

Vector NlpProblem::kkt_residual(const Vector& x, const Vector& y,
                                const Vector& v) const {
  require(x.size() == dim_x && y.size() == dim_g,
          "kkt_residual: dimension mismatch");
  Vector r(dim_x + dim_g);
  r << grad_lagrangian(x, y, v), g(x, v);
  return r;
}

Box NlpProblem::kkt_cone() const {
  return Box::product(feasible_set, Box::free(dim_g));
}

Matrix NlpProblem::kkt_matrix(const Vector& x, const Vector& y,
                              const Vector& v) const {
  Matrix w;
  if (hess_lagrangian) {
    w = hess_lagrangian(x, y, v);
  } else {
    // Central differences of the Lagrangian gradient.
    const double step = 1e-6 * (1.0 + x.norm());
    w.resize(dim_x, dim_x);
    Vector xp = x, xm = x;
    for (int c = 0; c < dim_x; ++c) {
      xp[c] += step;
      xm[c] -= step;
      w.col(c) = (grad_lagrangian(xp, y, v) - grad_lagrangian(xm, y, v)) /
                 (2.0 * step);
      xp[c] = x[c];
      xm[c] = x[c];
    }
    w = 0.5 * (w + w.transpose()).eval();
  }
  const Matrix j = jac_g(x, v);
  Matrix m = Matrix::Zero(dim_x + dim_g, dim_x + dim_g);
  m.topLeftCorner(dim_x, dim_x) = w;
  m.topRightCorner(dim_x, dim_g) = j.transpose();
  m.bottomLeftCorner(dim_g, dim_x) = j;
  return m;
}

double NlpProblem::kkt_residual_norm(const Vector& x, const Vector& y) const {
  const Vector v0 = Vector::Zero(dim_v);
  Vector z(dim_x + dim_g);
  z << x, y;
  return natural_residual(z, kkt_residual(x, y, v0), kkt_cone()).norm();
}

void NlpProblem::check_solution(double tol) const {
  if (!xbar || !ybar) return;
  require(kkt_residual_norm(*xbar, *ybar) <= tol,
          "NlpProblem: (xbar, ybar) is not a KKT point");
  if (dim_g > 0) {
    require(licq_check(*this, *xbar).holds,
            "NlpProblem: LICQ fails at xbar");
  }
}

KktSystem assemble_kkt(const NlpProblem& nlp, const Vector& x, const Vector& y,
                       const Vector& v) {
  return {nlp.kkt_residual(x, y, v), nlp.kkt_cone()};
}

GeneralizedEquation make_kkt_geneq(const NlpProblem& nlp) {
  GeneralizedEquation ge;
  ge.dim_z = nlp.dim_x + nlp.dim_g;
  ge.dim_v = nlp.dim_v;
  ge.cone = nlp.kkt_cone();
  const int n = nlp.dim_x;
  ge.f = [nlp, n](const Vector& z, const Vector& v) {
    return nlp.kkt_residual(z.head(n), z.tail(z.size() - n), v);
  };
  ge.jacobian = [nlp, n](const Vector& z, const Vector& v) {
    return nlp.kkt_matrix(z.head(n), z.tail(z.size() - n), v);
  };
  if (nlp.xbar && nlp.ybar) {
    Vector zb(ge.dim_z);
    zb << *nlp.xbar, *nlp.ybar;
    ge.zbar = zb;
  }
  return ge;
}

LicqReport licq_check(const NlpProblem& nlp, const Vector& x) {
  const Vector v0 = Vector::Zero(nlp.dim_v);
  const Matrix j = nlp.jac_g(x, v0);
  LicqReport rep;
  if (j.rows() == 0) {
    rep.holds = true;
    rep.sigma_min = kInf;
    return rep;
  }
  Eigen::JacobiSVD<Matrix> svd(j);
  rep.sigma_min = svd.singularValues().minCoeff();
  // Row-rank deficiency also shows up when m > n.
  if (j.rows() > j.cols()) rep.sigma_min = 0.0;
  rep.holds = rep.sigma_min > 1e-8;
  return rep;
}

Linearization sqp_linearization(const NlpProblem& nlp) {
  return Linearization::custom(
      [nlp](const GeneralizedEquation&, const Vector& z, const Vector& v) {
        return nlp.kkt_matrix(z.head(nlp.dim_x), z.tail(nlp.dim_g), v);
      },
      Linearization::Kind::kSqpHessian);
}

Linearization convexification_linearization(const NlpProblem& nlp) {
  return Linearization::custom(
      [nlp](const GeneralizedEquation&, const Vector& z, const Vector& v) {
        const Matrix j = nlp.jac_g(z.head(nlp.dim_x), v);
        Matrix m = Matrix::Zero(nlp.dim_x + nlp.dim_g, nlp.dim_x + nlp.dim_g);
        m.topRightCorner(nlp.dim_x, nlp.dim_g) = j.transpose();
        m.bottomLeftCorner(nlp.dim_g, nlp.dim_x) = j;
        return m;
      },
      Linearization::Kind::kZeroHessian);
}

SqpStep sqp_step(const NlpProblem& nlp, const Vector& x_k, const Vector& y_k,
                 const Matrix& b, const Vector& v_k, const NewtonConfig& cfg) {
  require(b.rows() == nlp.dim_x && b.cols() == nlp.dim_x,
          "sqp_step: B must be dim_x x dim_x");
  require((b - b.transpose()).norm() <= 1e-10 * (1.0 + b.norm()),
          "sqp_step: B must be symmetric");

  const int n = nlp.dim_x, m = nlp.dim_g;
  const Matrix j = nlp.jac_g(x_k, v_k);
  Matrix h = Matrix::Zero(n + m, n + m);
  h.topLeftCorner(n, n) = b;
  h.topRightCorner(n, m) = j.transpose();
  h.bottomLeftCorner(m, n) = j;

  Vector fk(n + m);
  fk << nlp.grad_lagrangian(x_k, y_k, v_k), nlp.g(x_k, v_k);
  Vector zk(n + m);
  zk << x_k, y_k;

  MixedAvi avi(fk - h * zk, h, nlp.kkt_cone());
  SqpStep step;
  const Vector z_next =
      solve_avi_semismooth(avi, zk, cfg.subproblem_tol, cfg.subproblem_max_iter);
  step.x = z_next.head(n);
  step.y = z_next.tail(m);
  if (cfg.enable_oracle && n + m <= cfg.oracle_dim_cap) {
    const EnumerationResult en = solve_avi_enumerate(avi);
    if (en.solutions.size() > 1) step.status = StepStatus::kNonUniqueSubproblem;
  }
  return step;
}

HessianApprox broyden_update(const HessianApprox& h, const Vector& s,
                             const Vector& yvec) {
  require(s.size() == h.b.rows() && yvec.size() == h.b.rows(),
          "broyden_update: dimension mismatch");
  HessianApprox out = h;
  const double sy = yvec.dot(s);
  if (sy <= h.curvature_skip_tol * s.norm() * yvec.norm()) {
    return out;  // curvature guard: keep B
  }
  const Matrix& b = h.b;
  if (h.family == HessianApprox::Family::kBfgs) {
    const Vector bs = b * s;
    const double sbs = s.dot(bs);
    if (sbs <= 0.0) return out;
    out.b = b - (bs * bs.transpose()) / sbs +
            (yvec * yvec.transpose()) / sy;
  } else {
    // DFP in its direct form on B.
    const Matrix eye = Matrix::Identity(b.rows(), b.cols());
    const Matrix vy = yvec * s.transpose() / sy;
    out.b = (eye - vy) * b * (eye - vy).transpose() +
            (yvec * yvec.transpose()) / sy;
  }
  out.b = 0.5 * (out.b + out.b.transpose()).eval();
  return out;
}

namespace {

Matrix initial_b(const NlpProblem& nlp, const Vector& x0, const Vector& y0,
                 const SqpConfig& cfg) {
  const Vector v0 = Vector::Zero(nlp.dim_v);
  switch (cfg.b0_mode) {
    case SqpConfig::B0Mode::kGiven:
      require(cfg.b0.has_value(), "run_sqp: b0_mode kGiven without b0");
      return *cfg.b0;
    case SqpConfig::B0Mode::kExactHessianAtStart:
      return nlp.kkt_matrix(x0, y0, v0).topLeftCorner(nlp.dim_x, nlp.dim_x);
    case SqpConfig::B0Mode::kScaledIdentity: {
      // Probe step along the Lagrangian gradient to size the identity.
      const Vector g0 = nlp.grad_lagrangian(x0, y0, v0);
      const double gn = g0.norm();
      if (gn == 0.0) return Matrix::Identity(nlp.dim_x, nlp.dim_x);
      const double t = 1e-4 * (1.0 + x0.norm()) / gn;
      const Vector s = -t * g0;
      const Vector yvec =
          nlp.grad_lagrangian(x0 + s, y0, v0) - g0;
      const double scale = yvec.norm() / s.norm();
      return (scale > 0.0 ? scale : 1.0) * Matrix::Identity(nlp.dim_x, nlp.dim_x);
    }
  }
  return Matrix::Identity(nlp.dim_x, nlp.dim_x);
}

}  // namespace

Trace run_sqp(const NlpProblem& nlp, const Vector& x0, const Vector& y0,
              const DisturbanceSequence& dist, const SqpConfig& cfg) {
  require(dist.dim() == nlp.dim_v, "run_sqp: disturbance dimension");
  const Vector v0 = Vector::Zero(nlp.dim_v);

  Trace trace;
  Vector x = x0, y = y0;
  HessianApprox approx;
  approx.family = cfg.family;
  approx.curvature_skip_tol = cfg.curvature_skip_tol;
  approx.b = initial_b(nlp, x0, y0, cfg);

  const bool track_b = static_cast<bool>(nlp.hess_lagrangian) && nlp.xbar &&
                       nlp.ybar;
  Matrix hess_star;
  if (track_b) hess_star = nlp.hess_lagrangian(*nlp.xbar, *nlp.ybar, v0);

  auto record = [&](const Vector& xx, const Vector& yy, const Matrix& bb) {
    Vector z(nlp.dim_x + nlp.dim_g);
    z << xx, yy;
    trace.iterates.push_back(z);
    trace.residuals.push_back(nlp.kkt_residual_norm(xx, yy));
    if (nlp.xbar && nlp.ybar) {
      Vector zb(nlp.dim_x + nlp.dim_g);
      zb << *nlp.xbar, *nlp.ybar;
      trace.errors_to_zbar.push_back((z - zb).norm());
    }
    if (track_b) trace.extras["b_error"].push_back((bb - hess_star).norm());
  };
  record(x, y, approx.b);

  for (int k = 0; k < cfg.newton.max_iter; ++k) {
    if (trace.residuals.back() <= cfg.newton.tol) break;
    const Vector v = dist.at(k);
    const auto step_start = std::chrono::steady_clock::now();
    auto record_seconds = [&] {
      trace.extras["step_seconds"].push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                        step_start)
              .count());
    };
    SqpStep step;
    try {
      if (cfg.exact_hessian) {
        approx.b = nlp.kkt_matrix(x, y, v).topLeftCorner(nlp.dim_x, nlp.dim_x);
      }
      step = sqp_step(nlp, x, y, approx.b, v, cfg.newton);
    } catch (const SolverError& err) {
      StepStatus s = err.code() == SolverError::Code::kSingularPattern
                         ? StepStatus::kSingularPattern
                         : StepStatus::kMaxIterExceeded;
      record_seconds();
      trace.disturbances.push_back(v);
      trace.step_status.push_back(s);
      record(x, y, approx.b);
      trace.validate();
      return trace;
    }

    if (!cfg.exact_hessian) {
      const Vector s = step.x - x;
      if (s.norm() > cfg.min_update_step * (1.0 + x.norm())) {
        const Vector yvec = nlp.grad_lagrangian(step.x, step.y, v) -
                            nlp.grad_lagrangian(x, step.y, v);
        approx = broyden_update(approx, s, yvec);
      }
    }

    x = step.x;
    y = step.y;
    record_seconds();
    trace.disturbances.push_back(v);
    Vector z(nlp.dim_x + nlp.dim_g);
    z << x, y;
    if (!z.allFinite() || z.norm() > cfg.newton.divergence_norm) {
      step.status = StepStatus::kDiverged;
    }
    trace.step_status.push_back(step.status);
    record(x, y, approx.b);
    if (step.status == StepStatus::kDiverged) break;
  }
  trace.validate();
  return trace;
}

Vector alm_inner_solve(const NlpProblem& nlp, const Vector& y_k,
                       const Vector& v_k, const AlmConfig& cfg,
                       const Vector& x_warm) {
  require(cfg.rho > 0.0, "alm_inner_solve: rho must be positive");
  const MultistepProblem mp = make_alm_multistep(nlp, cfg.rho);
  MultistepConfig mcfg;
  mcfg.newton = cfg.newton;
  mcfg.inner_tol = cfg.inner_tol;
  mcfg.inner_max_iter = cfg.inner_max_iter;
  return inner_solve(mp, x_warm, y_k, v_k, InnerMode::exact(), mcfg, 0).x_next;
}

MultistepProblem make_alm_multistep(const NlpProblem& nlp, double rho) {
  require(rho > 0.0, "make_alm_multistep: rho must be positive");
  MultistepProblem mp;
  mp.dim_x = nlp.dim_x;
  mp.dim_y = nlp.dim_g;
  mp.dim_v = nlp.dim_v;
  mp.cone = nlp.kkt_cone();
  mp.cone_tilde = nlp.feasible_set;
  mp.f = [nlp](const Vector& x, const Vector& y, const Vector& v) {
    return nlp.kkt_residual(x, y, v);
  };
  // Penalized stationarity: grad_h + jac_g^T (y + rho g) + N_C(x).
  mp.f_tilde = [nlp, rho](const Vector& x, const Vector& y, const Vector& v) {
    return nlp.grad_lagrangian(x, y + rho * nlp.g(x, v), v);
  };
  if (nlp.hess_lagrangian) {
    mp.jac_f_tilde = [nlp, rho](const Vector& x, const Vector& y,
                                const Vector& v) {
      const Matrix j = nlp.jac_g(x, v);
      return (nlp.hess_lagrangian(x, y + rho * nlp.g(x, v), v) +
              rho * j.transpose() * j)
          .eval();
    };
  }
  mp.h_y = [nlp, rho](const Vector& xi, const Vector&, const Vector& v) {
    Matrix hy(nlp.dim_x + nlp.dim_g, nlp.dim_g);
    hy.topRows(nlp.dim_x) = nlp.jac_g(xi, v).transpose();
    hy.bottomRows(nlp.dim_g) =
        -Matrix::Identity(nlp.dim_g, nlp.dim_g) / rho;
    return hy;
  };
  mp.xbar = nlp.xbar;
  mp.ybar = nlp.ybar;
  return mp;
}

Trace run_alm(const NlpProblem& nlp, const Vector& x0, const Vector& y0,
              const DisturbanceSequence& dist, const AlmConfig& cfg) {
  const MultistepProblem mp = make_alm_multistep(nlp, cfg.rho);
  MultistepConfig mcfg;
  mcfg.newton = cfg.newton;
  mcfg.newton.tol = cfg.tol;
  mcfg.newton.max_iter = cfg.max_outer;
  mcfg.inner = cfg.inner;
  mcfg.inner_tol = cfg.inner_tol;
  mcfg.inner_max_iter = cfg.inner_max_iter;
  const double rho = cfg.rho;
  mcfg.step_hook = [&nlp, rho](int, const Vector& x_next, const Vector& y_k,
                               const Vector& v_k, const Vector& y_next,
                               Trace& trace) {
    const Vector closed_form = y_k + rho * nlp.g(x_next, v_k);
    trace.extras["dual_update_gap"].push_back((y_next - closed_form).norm());
  };
  return run_multistep(mp, x0, y0, dist, mcfg);
}

}  // namespace genewton
