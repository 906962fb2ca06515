#include "genewton/geneq.hpp"

#include "genewton/problems.hpp"
#include "genewton/rng.hpp"

#include <doctest.h>

using namespace genewton;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

GeneralizedEquation scalar_root() {
  return find_problem("scalar-root")->make_geneq(DisturbanceChannel::kAdditiveF);
}

}  // namespace

TEST_CASE("josephy newton step reproduces the hand Newton step") {
  const GeneralizedEquation ge = scalar_root();
  const Vector z1 = josephy_newton_step(ge, Linearization::exact_gradient(),
                                        vec({2}), vec({0}));
  CHECK(z1[0] == doctest::Approx(1.25).epsilon(1e-12));  // 2 - 3/4
}

TEST_CASE("zbar is a fixed point of the step") {
  const GeneralizedEquation ge = scalar_root();
  ge.check_zbar();
  const Vector z1 = josephy_newton_step(ge, Linearization::exact_gradient(),
                                        *ge.zbar, vec({0}));
  CHECK((z1 - *ge.zbar).norm() < 1e-12);
}

TEST_CASE("scaled-identity step equals the explicit projection formula") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 1 + trial % 4;
    GeneralizedEquation ge;
    ge.dim_z = dim;
    ge.dim_v = dim;
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    Vector b(dim);
    for (int i = 0; i < dim; ++i) b[i] = rng.uniform(-1.0, 1.0);
    ge.f = [m, b](const Vector& z, const Vector& v) {
      return (m * z + b + v).eval();
    };
    ge.jacobian = [m](const Vector&, const Vector&) { return m; };
    Vector lo(dim), up(dim);
    for (int i = 0; i < dim; ++i) {
      lo[i] = rng.uniform(-1.0, 0.0);
      up[i] = lo[i] + rng.uniform(0.1, 2.0);
    }
    ge.cone = Box(lo, up);

    const double alpha = rng.uniform(0.05, 0.5);
    Vector z(dim);
    for (int i = 0; i < dim; ++i) z[i] = rng.uniform(lo[i], up[i]);
    const Vector v = Vector::Zero(dim);

    const Vector by_step = josephy_newton_step(
        ge, Linearization::scaled_identity(alpha), z, v);
    const Vector by_formula =
        project_box(z - alpha * ge.eval(z, v), ge.cone);
    CHECK((by_step - by_formula).norm() < 1e-12);
  }
}

TEST_CASE("undisturbed newton run converges quadratically on the scalar root") {
  const GeneralizedEquation ge = scalar_root();
  NewtonConfig cfg;
  cfg.max_iter = 10;
  const Trace trace = run_newton(ge, Linearization::exact_gradient(), vec({2}),
                                 DisturbanceSequence::zero(1), cfg);
  trace.validate();
  CHECK(trace.completed_ok());
  CHECK(trace.steps() <= 6);
  CHECK(trace.residuals.back() < 1e-12);
  CHECK(trace.errors_to_zbar.back() < 1e-12);
  // Error ratios e_{k+1} / e_k^2 stay near 1/2 along the tail.
  const auto& e = trace.errors_to_zbar;
  for (std::size_t k = 2; k + 1 < e.size(); ++k) {
    if (e[k] > 1e-14 && e[k + 1] > 0) {
      CHECK(e[k + 1] / (e[k] * e[k]) == doctest::Approx(0.5).epsilon(0.05));
    }
  }
}

TEST_CASE("run from the solution stays put") {
  const GeneralizedEquation ge = scalar_root();
  const Trace trace = run_newton(ge, Linearization::exact_gradient(),
                                 *ge.zbar, DisturbanceSequence::zero(1));
  CHECK(trace.steps() == 0);
  CHECK(trace.residuals.back() < 1e-12);
}

TEST_CASE("gradient-perturbed step matches the hand computation") {
  const GeneralizedEquation ge = scalar_root();

  // v = 0 reproduces the exact Newton step.
  const Matrix zero = Matrix::Zero(1, 1);
  CHECK(gradient_perturbed_step(ge, vec({2}), zero)[0] ==
        doctest::Approx(1.25).epsilon(1e-12));

  // H = 4 + 1 = 5 gives 2 - 3/5.
  Matrix one(1, 1);
  one << 1.0;
  CHECK(gradient_perturbed_step(ge, vec({2}), one)[0] ==
        doctest::Approx(1.4).epsilon(1e-12));
}

TEST_CASE("per-step quadratic bound holds along gradient-disturbed traces") {
  const GeneralizedEquation ge =
      find_problem("scalar-root")->make_geneq(DisturbanceChannel::kGradientH);
  NewtonConfig cfg;
  cfg.max_iter = 40;
  const Trace trace =
      run_newton(ge, Linearization::gradient_plus_noise(), vec({1.3}),
                 DisturbanceSequence::random_bounded(0.1, 1, 21), cfg);
  trace.validate();
  CHECK(trace.completed_ok());

  // kappa = 1/|f'(zbar)| = 1/2 and L = 1 for z^2 - 1; check
  // e+ <= kappa L e^2 + kappa e |v| with a small slack.
  const auto& e = trace.errors_to_zbar;
  const auto v = trace.disturbance_norms();
  for (int k = 0; k < trace.steps(); ++k) {
    const double bound = 0.5 * e[k] * e[k] + 0.5 * e[k] * v[k];
    CHECK(e[k + 1] <= bound * (1.0 + 0.35) + 1e-15);
  }
  // Errors recover to the solver floor since the gain vanishes near zbar.
  CHECK(e.back() < 1e-10);
}

TEST_CASE("per-step ISS inequality is feasible along disturbed traces") {
  const GeneralizedEquation ge = scalar_root();
  NewtonConfig cfg;
  cfg.max_iter = 40;
  const Trace trace =
      run_newton(ge, Linearization::exact_gradient(), vec({1.4}),
                 DisturbanceSequence::random_bounded(1e-3, 1, 5), cfg);
  CHECK(trace.completed_ok());
  CHECK(trace.steps() == 40);  // persistent noise, no convergence stop
  const auto& e = trace.errors_to_zbar;
  const auto v = trace.disturbance_norms();
  // A crude feasible pair: alpha = 0.8, gamma = 2.
  for (int k = 0; k < trace.steps(); ++k) {
    CHECK(e[k + 1] <= 0.8 * e[k] + 2.0 * v[k] + 1e-14);
  }
}

TEST_CASE("oracle reports non-unique subproblem solutions without halting") {
  // Indefinite affine equation: the second component admits three solutions
  // on [0, 1] (both bounds and the interior stationary point).
  GeneralizedEquation ge;
  ge.dim_z = 2;
  ge.dim_v = 2;
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  const Vector a = vec({-0.5, 0.5});
  ge.f = [m, a](const Vector& z, const Vector& v) {
    return (a + m * z + v).eval();
  };
  ge.jacobian = [m](const Vector&, const Vector&) { return m; };
  ge.cone = Box::bounds(0, 1, 2);

  NewtonConfig cfg;
  cfg.enable_oracle = true;
  cfg.max_iter = 3;
  const StepReport rep = josephy_newton_step_report(
      ge, Linearization::exact_gradient(), vec({0.2, 0.8}), vec({0, 0}), cfg);
  CHECK(rep.oracle_solutions >= 2);
  CHECK(rep.status == StepStatus::kNonUniqueSubproblem);

  const Trace trace = run_newton(ge, Linearization::exact_gradient(),
                                 vec({0.2, 0.8}), DisturbanceSequence::zero(2),
                                 cfg);
  // Reported, not fatal: the run continues past the warning.
  CHECK(trace.completed_ok());
  bool warned = false;
  for (StepStatus s : trace.step_status) {
    warned = warned || s == StepStatus::kNonUniqueSubproblem;
  }
  CHECK(warned);
}

TEST_CASE("divergence guard halts the run") {
  GeneralizedEquation ge;
  ge.dim_z = 1;
  ge.dim_v = 1;
  ge.cone = Box::free(1);
  ge.f = [](const Vector&, const Vector&) { return vec({-1.0}); };
  ge.jacobian = [](const Vector&, const Vector&) {
    return Matrix(1e-7 * Matrix::Identity(1, 1));
  };
  const Trace trace = run_newton(ge, Linearization::exact_gradient(),
                                 vec({0}), DisturbanceSequence::zero(1));
  CHECK(trace.final_status() == StepStatus::kDiverged);
  CHECK_FALSE(trace.completed_ok());
  trace.validate();
}

TEST_CASE("finite-difference jacobian fallback drives the iteration") {
  GeneralizedEquation ge;
  ge.dim_z = 1;
  ge.dim_v = 1;
  ge.cone = Box::free(1);
  ge.f = [](const Vector& z, const Vector& v) {
    Vector r(1);
    r[0] = z[0] * z[0] - 1.0 + v[0];
    return r;
  };  // no jacobian on purpose
  ge.zbar = vec({1});
  NewtonConfig cfg;
  cfg.tol = 1e-10;
  const Trace trace = run_newton(ge, Linearization::exact_gradient(), vec({2}),
                                 DisturbanceSequence::zero(1), cfg);
  CHECK(trace.residuals.back() < 1e-10);
}
