// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances in code; runtimes are reported
// so the desk-scale budgets stay visible.

#include "genewton/experiment.hpp"
#include "genewton/isslab.hpp"
#include "genewton/nlp.hpp"
#include "genewton/problems.hpp"
#include "genewton/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace genewton;

namespace {

struct Criterion {
  std::string name;
  std::function<bool(std::string&)> run;
};

Vector vec1(double a) {
  Vector v(1);
  v << a;
  return v;
}

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

bool expect(bool cond, const std::string& what, std::string& detail) {
  if (!cond && detail.empty()) detail = what;
  return cond;
}

Matrix random_spd(Rng& rng, int dim) {
  Matrix a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
  return a * a.transpose() + 0.3 * Matrix::Identity(dim, dim);
}

Box random_mixed_box(Rng& rng, int dim) {
  Vector lo(dim), up(dim);
  for (int i = 0; i < dim; ++i) {
    const double kind = rng.uniform01();
    if (kind < 0.25) {
      lo[i] = -kInf;
      up[i] = kInf;
    } else if (kind < 0.5) {
      lo[i] = rng.uniform(-1.0, 0.5);
      up[i] = kInf;
    } else if (kind < 0.75) {
      lo[i] = -kInf;
      up[i] = rng.uniform(-0.5, 1.0);
    } else {
      lo[i] = rng.uniform(-1.0, 0.0);
      up[i] = lo[i] + rng.uniform(0.5, 2.0);
    }
  }
  return Box(lo, up);
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence on 200 seeded random mixed AVIs.
bool criterion_oracle_equivalence(std::string& detail) {
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(9000 + trial);
    const int dim = 1 + trial % 5;
    const Matrix m = random_spd(rng, dim);
    Vector a(dim);
    for (int i = 0; i < dim; ++i) a[i] = rng.uniform(-2.0, 2.0);
    MixedAvi p(a, m, random_mixed_box(rng, dim));

    const EnumerationResult oracle = solve_avi_enumerate(p);
    ok &= expect(oracle.solutions.size() == 1,
                 "trial " + std::to_string(trial) + ": oracle found " +
                     std::to_string(oracle.solutions.size()) + " solutions",
                 detail);
    if (oracle.solutions.size() != 1) continue;
    const Vector z = solve_avi_semismooth(p, Vector::Zero(dim), 1e-12, 200);
    const double gap = (z - oracle.solutions[0]).norm();
    ok &= expect(gap <= 1e-8,
                 "trial " + std::to_string(trial) + ": |semismooth - oracle| = " +
                     format_double(gap),
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 2. Quadratic convergence of exact Newton; fitted constant 0.5 +- 20%.
bool criterion_quadratic_convergence(std::string& detail) {
  bool ok = true;

  ExperimentConfig scalar;
  scalar.problem = "scalar-root";
  scalar.algorithm = Algorithm::kNewton;
  scalar.max_iter = 10;
  const RunResult rs = run_experiment(scalar);
  ok &= expect(rs.converged && rs.final_residual < 1e-12 && rs.iterations <= 10,
               "scalar-root newton: no residual < 1e-12 in <= 10 iterations",
               detail);

  ExperimentConfig rosen;
  rosen.problem = "rosenbrock-circle";
  rosen.algorithm = Algorithm::kNewton;
  rosen.max_iter = 10;
  const RunResult rr = run_experiment(rosen);
  ok &= expect(rr.converged && rr.final_residual < 1e-12 && rr.iterations <= 10,
               "rosenbrock-circle newton: no residual < 1e-12 in <= 10 "
               "iterations (got " +
                   format_double(rr.final_residual) + " after " +
                   std::to_string(rr.iterations) + ")",
               detail);

  ok &= expect(rs.quadratic.has_value(), "scalar quadratic fit missing", detail);
  if (rs.quadratic) {
    const double c = rs.quadratic->c;
    ok &= expect(c >= 0.4 && c <= 0.6,
                 "scalar quadratic constant " + format_double(c) +
                     " outside 0.5 +- 20%",
                 detail);
    ok &= expect(!rs.quadratic->not_quadratic,
                 "scalar trace flagged not quadratic", detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 3. ISS ball containment across disturbance levels, plus decaying recovery.
bool criterion_iss_ball(std::string& detail) {
  bool ok = true;
  const std::vector<double> deltas{1e-4, 1e-3, 1e-2};
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  for (const std::string problem : {"scalar-eq", "box-qp"}) {
    const GeneralizedEquation ge =
        find_problem(problem)->make_geneq(DisturbanceChannel::kAdditiveF);
    const Vector start = find_problem(problem)->start;

    NewtonConfig cfg;
    cfg.max_iter = 60;
    cfg.tol = 0.0;  // run the full horizon; the floor is set by the noise

    std::vector<Trace> traces;
    std::vector<double> level_means;
    double worst_gain = 0.0;
    for (double delta : deltas) {
      double mean = 0.0;
      for (std::uint64_t seed : seeds) {
        const Trace t = run_newton(
            ge, Linearization::exact_gradient(), start,
            DisturbanceSequence::random_bounded(delta, ge.dim_v, seed), cfg);
        const IssEstimate est = estimate_iss_gains(t, *ge.zbar);
        ok &= expect(est.feasible && est.alpha < 1.0,
                     problem + " delta=" + format_double(delta) + " seed=" +
                         std::to_string(seed) + ": infeasible ISS estimate",
                     detail);
        if (est.feasible) worst_gain = std::max(worst_gain, est.asymptotic_gain());
        double limsup = 0.0;
        const auto& e = t.errors_to_zbar;
        for (std::size_t k = e.size() - e.size() / 4; k < e.size(); ++k) {
          limsup = std::max(limsup, e[k]);
        }
        mean += limsup;
        traces.push_back(t);
      }
      level_means.push_back(mean / static_cast<double>(seeds.size()));
    }

    const BallContainmentReport report =
        ball_containment(traces, *ge.zbar, worst_gain);
    ok &= expect(report.all_pass, problem + ": ball containment failed", detail);
    for (std::size_t i = 0; i + 1 < level_means.size(); ++i) {
      const double ratio = level_means[i + 1] / level_means[i];
      ok &= expect(ratio >= 5.0 && ratio <= 20.0,
                   problem + ": asymptotic-error ratio " + format_double(ratio) +
                       " outside [5, 20]",
                   detail);
    }

    // Decaying disturbances recover full convergence.
    NewtonConfig dcfg;
    dcfg.max_iter = 80;
    dcfg.tol = 1e-12;
    const Trace decayed =
        run_newton(ge, Linearization::exact_gradient(), start,
                   DisturbanceSequence::decaying(1e-2, 0.5, ge.dim_v), dcfg);
    ok &= expect(decayed.errors_to_zbar.back() <= 1e-10,
                 problem + ": decaying disturbance did not recover (err " +
                     format_double(decayed.errors_to_zbar.back()) + ")",
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 4. Linearization-equivalence identities on 50 random instances.
bool criterion_table_equivalences(std::string& detail) {
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(12000 + trial);
    const int n = 2 + trial % 3;
    Matrix root(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) root(r, c) = rng.uniform(-1.0, 1.0);
    InlineNlpSpec spec;
    spec.dim = n;
    spec.q = root * root.transpose() + 0.5 * Matrix::Identity(n, n);
    spec.c = Vector::Zero(n);
    for (int i = 0; i < n; ++i) spec.c[i] = rng.uniform(-1.0, 1.0);
    spec.constraint = InlineNlpSpec::Constraint::kLinear;
    spec.a = Matrix(1, n);
    for (int i = 0; i < n; ++i) spec.a(0, i) = rng.uniform(-1.0, 1.0);
    spec.b = vec1(rng.uniform(-0.5, 0.5));
    if (trial % 2 == 0) {
      spec.lower = Vector::Constant(n, -1.0);
      spec.upper = Vector::Constant(n, 1.0);
    }
    const NlpProblem nlp = build_inline_nlp(spec);
    const GeneralizedEquation ge = make_kkt_geneq(nlp);
    const Vector v0 = Vector::Zero(nlp.dim_v);

    Vector z(n + 1);
    for (int i = 0; i < n; ++i) z[i] = rng.uniform(-0.8, 0.8);
    z[n] = rng.uniform(-0.5, 0.5);
    const Vector x = z.head(n);
    const Vector y = z.tail(1);

    // Projected-gradient row.
    const double alpha = rng.uniform(0.05, 0.4);
    const Vector pgd_step = josephy_newton_step(
        ge, Linearization::scaled_identity(alpha), z, v0);
    const Vector x_cf = project_box(
        x - alpha * (nlp.grad_h(x, v0) + nlp.jac_g(x, v0).transpose() * y),
        nlp.feasible_set);
    const Vector y_cf = y - alpha * nlp.g(x, v0);
    double gap = (pgd_step.head(n) - x_cf).norm() + (pgd_step.tail(1) - y_cf).norm();
    ok &= expect(gap <= 1e-10,
                 "trial " + std::to_string(trial) +
                     ": pgd projection gap " + format_double(gap),
                 detail);

    // SQP row: exact-Hessian QP step equals the exact Newton step.
    const SqpStep qp_step = sqp_step(
        nlp, x, y, nlp.kkt_matrix(x, y, v0).topLeftCorner(n, n), v0);
    const Vector newton_step =
        josephy_newton_step(ge, Linearization::exact_gradient(), z, v0);
    Vector qp_z(n + 1);
    qp_z << qp_step.x, qp_step.y;
    gap = (qp_z - newton_step).norm();
    ok &= expect(gap <= 1e-10,
                 "trial " + std::to_string(trial) + ": sqp/newton gap " +
                     format_double(gap),
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 5. ALM dual update equals the inclusion solve; scalar rate 1/6; rho sweep
//    monotone.
bool criterion_alm_consistency(std::string& detail) {
  bool ok = true;

  // Closed form vs inclusion on every step of every registry NLP.
  for (const ProblemDefinition& def : problem_registry()) {
    if (!def.is_nlp) continue;
    const NlpProblem nlp = def.make_nlp(DisturbanceChannel::kAdditiveG);
    AlmConfig cfg;
    cfg.rho = 10.0;
    cfg.max_outer = 25;
    Vector x0 = def.start.head(def.dim_x);
    Vector y0 = def.start.tail(def.dim_g);
    if (def.name == "rosenbrock-circle") y0 = vec1(0.3);  // nontrivial dual path
    const Trace t = run_alm(nlp, x0, y0,
                            DisturbanceSequence::zero(nlp.dim_v), cfg);
    ok &= expect(t.completed_ok(), def.name + ": alm run failed", detail);
    const auto it = t.extras.find("dual_update_gap");
    ok &= expect(it != t.extras.end() && !it->second.empty(),
                 def.name + ": no dual gap channel", detail);
    if (it != t.extras.end()) {
      for (double gap : it->second) {
        ok &= expect(gap <= 1e-10,
                     def.name + ": dual update gap " + format_double(gap),
                     detail);
      }
    }
  }

  // Scalar dual contraction rate 1/6 +- 10% at rho = 10.
  {
    ExperimentConfig cfg;
    cfg.problem = "scalar-eq";
    cfg.algorithm = Algorithm::kAlm;
    cfg.rho = 10.0;
    cfg.max_iter = 30;
    const RunResult res = run_experiment(cfg);
    ok &= expect(res.rate_fit.has_value(), "scalar-eq alm: no rate fit", detail);
    if (res.rate_fit) {
      ok &= expect(std::abs(*res.rate_fit - 1.0 / 6.0) <= 1.0 / 60.0,
                   "scalar-eq alm rate " + format_double(*res.rate_fit) +
                       " not within 1/6 +- 10%",
                   detail);
    }
  }

  // Rate column monotone nonincreasing over the rho grid.
  {
    ExperimentConfig cfg;
    cfg.problem = "scalar-eq";
    cfg.algorithm = Algorithm::kAlm;
    cfg.rho_grid = {2, 5, 10, 50, 100};
    cfg.max_iter = 60;
    const SweepResult sweep = run_sweep(cfg);
    const auto rate_col =
        std::find(sweep.header.begin(), sweep.header.end(), "rate_fit") -
        sweep.header.begin();
    double prev = kInf;
    for (const auto& row : sweep.rows) {
      ok &= expect(!row[rate_col].empty(), "alm sweep: missing rate", detail);
      if (row[rate_col].empty()) continue;
      const double rate = std::stod(row[rate_col]);
      ok &= expect(rate <= prev * (1.0 + 1e-9),
                   "alm sweep: rate not monotone at rho=" + row[2], detail);
      prev = rate;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 6. BFGS-SQP local stability on rosenbrock-circle.
bool criterion_bfgs_sqp(std::string& detail) {
  const NlpProblem nlp =
      find_problem("rosenbrock-circle")->make_nlp(DisturbanceChannel::kAdditiveF);
  SqpConfig cfg;
  cfg.newton.max_iter = 40;
  cfg.newton.tol = 1e-12;
  cfg.family = HessianApprox::Family::kBfgs;
  cfg.b0_mode = SqpConfig::B0Mode::kExactHessianAtStart;
  const Trace t = run_sqp(nlp, vec({1.05, 0.95}), vec1(0.0),
                          DisturbanceSequence::zero(nlp.dim_v), cfg);

  bool ok = true;
  ok &= expect(t.completed_ok(), "bfgs-sqp run failed", detail);
  const double kkt = nlp.kkt_residual_norm(t.iterates.back().head(2),
                                           t.iterates.back().tail(1));
  ok &= expect(kkt < 1e-8, "final KKT residual " + format_double(kkt), detail);

  // Combined measure ||z - zbar|| + ||B - hess_L(xbar, ybar)|| contracts
  // monotonically over the final five iterations.
  const auto& e = t.errors_to_zbar;
  const auto& be = t.extras.at("b_error");
  std::vector<double> combined(e.size());
  for (std::size_t k = 0; k < e.size(); ++k) combined[k] = e[k] + be[k];
  const std::size_t n = combined.size();
  ok &= expect(n >= 6, "trace too short for the tail check", detail);
  for (std::size_t k = n - 6; k + 1 < n; ++k) {
    ok &= expect(combined[k + 1] <= combined[k] * (1.0 + 1e-12),
                 "combined measure grew at step " + std::to_string(k) + ": " +
                     format_double(combined[k]) + " -> " +
                     format_double(combined[k + 1]),
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 7. Implicit-function probe bounds.
bool criterion_probe(std::string& detail) {
  bool ok = true;
  for (const char* name : {"affine-probe", "scalar-eq-param"}) {
    const ParametrizedGe pge = find_parametrized(name)->make();
    ProbeOptions opts;
    opts.samples = 100;
    const SolutionMapProbe probe = probe_solution_map(pge, opts);
    ok &= expect(probe.solver_failures == 0,
                 std::string(name) + ": solver failures", detail);
    ok &= expect(probe.bound_ok,
                 std::string(name) + ": ratios (" + format_double(probe.ratio_p1) +
                     ", " + format_double(probe.ratio_p2) +
                     ") exceed omega*lip bound with 10% slack",
                 detail);
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 8. Estimator soundness on synthetic traces.
bool criterion_estimator_soundness(std::string& detail) {
  bool ok = true;
  for (double alpha : {0.3, 0.5, 0.9}) {
    for (double gamma : {0.05, 0.1}) {
      Trace t;
      double e = 0.0;  // zero-error start pins the minimal gamma
      t.iterates.push_back(vec1(e));
      t.residuals.push_back(e);
      for (int k = 0; k < 120; ++k) {
        Rng rng(Rng::mix(31, static_cast<std::uint64_t>(k)));
        const double v = 1e-2 * rng.uniform01();
        e = alpha * e + gamma * v;
        t.disturbances.push_back(vec1(v));
        t.iterates.push_back(vec1(e));
        t.residuals.push_back(e);
        t.step_status.push_back(StepStatus::kOk);
      }
      const IssEstimate est = estimate_iss_gains(t, vec1(0.0));
      ok &= expect(est.feasible, "synthetic estimate infeasible", detail);
      ok &= expect(std::abs(est.alpha - alpha) <= 0.01 + 1e-12,
                   "alpha* = " + format_double(alpha) + " recovered as " +
                       format_double(est.alpha),
                   detail);
      ok &= expect(std::abs(est.gamma - gamma) <= 0.05 * gamma,
                   "gamma* = " + format_double(gamma) + " recovered as " +
                       format_double(est.gamma),
                   detail);
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// 9. Reproducibility: identical sweep configs produce byte-identical CSVs.
bool criterion_reproducibility(std::string& detail) {
  ExperimentConfig cfg;
  cfg.problem = "scalar-eq";
  cfg.algorithm = Algorithm::kNewton;
  cfg.disturbance.kind = DisturbanceSequence::Kind::kRandomBounded;
  cfg.delta_grid = {1e-4, 1e-3, 1e-2};
  cfg.seeds = {7, 8};
  cfg.max_iter = 40;
  cfg.workers = 4;

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "genewton_acceptance";
  fs::remove_all(dir);
  const SweepResult s1 = run_sweep(cfg);
  const std::string p1 = write_sweep_csv(s1, cfg, (dir / "run1").string());
  const SweepResult s2 = run_sweep(cfg);
  const std::string p2 = write_sweep_csv(s2, cfg, (dir / "run2").string());

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::stringstream b1, b2;
  b1 << f1.rdbuf();
  b2 << f2.rdbuf();
  fs::remove_all(dir);
  return expect(!b1.str().empty() && b1.str() == b2.str(),
                "sweep CSVs differ between invocations", detail);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"1 oracle equivalence (200 random mixed AVIs, 1e-8)",
       criterion_oracle_equivalence},
      {"2 quadratic convergence (newton residual < 1e-12, c = 0.5 +- 20%)",
       criterion_quadratic_convergence},
      {"3 ISS ball containment (alpha < 1, ratios in [5,20], decay recovery)",
       criterion_iss_ball},
      {"4 linearization equivalences (pgd projection, sqp = newton, 1e-10)",
       criterion_table_equivalences},
      {"5 multistep/ALM consistency (closed-form dual = inclusion solve, rate 1/6)",
       criterion_alm_consistency},
      {"6 BFGS-SQP local stability (monotone combined measure, KKT < 1e-8)",
       criterion_bfgs_sqp},
      {"7 implicit-function probe (omega*lip bound, 10% slack)",
       criterion_probe},
      {"8 estimator soundness (alpha within 0.01, gamma within 5%)",
       criterion_estimator_soundness},
      {"9 reproducibility (byte-identical sweep CSVs)",
       criterion_reproducibility},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& err) {
      detail = std::string("exception: ") + err.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %s (%.2fs)%s%s\n", pass ? "PASS" : "FAIL",
                c.name.c_str(), seconds, detail.empty() ? "" : " - ",
                detail.c_str());
    if (!pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
