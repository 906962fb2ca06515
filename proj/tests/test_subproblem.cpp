#include "genewton/subproblem.hpp"

#include "genewton/rng.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace genewton;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<int>(vals.size()));
  int i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

Matrix random_spd(Rng& rng, int dim) {
  Matrix a(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) a(r, c) = rng.uniform(-1.0, 1.0);
  }
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

}  // namespace

TEST_CASE("semismooth solver on scalar instances") {
  // Interior root of z - 1 on [0, 2].
  MixedAvi interior(vec({-1}), Matrix::Identity(1, 1), Box::bounds(0, 2, 1));
  CHECK(solve_avi_semismooth(interior, vec({0}))[0] == doctest::Approx(1.0));

  // -(a + Mz) = -1 lies in the cone at the lower bound.
  MixedAvi bound(vec({1}), Matrix::Identity(1, 1), Box::bounds(0, 2, 1));
  CHECK(solve_avi_semismooth(bound, vec({1}))[0] == doctest::Approx(0.0));
}

TEST_CASE("enumeration oracle on hand instances") {
  MixedAvi scalar(vec({-1}), Matrix::Identity(1, 1), Box::bounds(0, 2, 1));
  const auto res = solve_avi_enumerate(scalar);
  REQUIRE(res.solutions.size() == 1);
  CHECK(res.solutions[0][0] == doctest::Approx(1.0));
  CHECK(res.singular_patterns == 0);

  // 2-d complementarity: solution (1, 0) on the nonnegative orthant.
  Matrix m(2, 2);
  m << 2, 0, 0, 1;
  MixedAvi two(vec({-2, 1}), m, Box::nonnegative(2));
  const auto res2 = solve_avi_enumerate(two);
  REQUIRE(res2.solutions.size() == 1);
  CHECK((res2.solutions[0] - vec({1, 0})).norm() < 1e-12);
  CHECK((solve_avi_semismooth(two, vec({0, 0})) - vec({1, 0})).norm() < 1e-10);

  // Degenerate M = 0, a = 0: every z in [0,2] solves; the oracle returns the
  // bound representatives and flags the singular interior pattern.
  MixedAvi degen(vec({0}), Matrix::Zero(1, 1), Box::bounds(0, 2, 1));
  const auto res3 = solve_avi_enumerate(degen);
  CHECK(res3.solutions.size() == 2);
  CHECK(res3.singular_patterns == 1);
}

TEST_CASE("enumeration rejects large dimensions") {
  const int n = 9;
  MixedAvi big(Vector::Zero(n), Matrix::Identity(n, n), Box::free(n));
  CHECK_THROWS_AS(solve_avi_enumerate(big), SolverError);
}

TEST_CASE("oracle equivalence on random positive-definite instances") {
  int multiple = 0;
  for (int trial = 0; trial < 200; ++trial) {
    Rng rng(1000 + trial);
    const int dim = 1 + trial % 5;
    const Matrix m = random_spd(rng, dim);
    Vector a(dim);
    for (int i = 0; i < dim; ++i) a[i] = rng.uniform(-2.0, 2.0);
    const Box cone = random_mixed_box(rng, dim);
    MixedAvi p(a, m, cone);

    const auto oracle = solve_avi_enumerate(p);
    REQUIRE(oracle.solutions.size() == 1);
    if (oracle.solutions.size() > 1) ++multiple;

    const Vector z = solve_avi_semismooth(p, Vector::Zero(dim), 1e-12, 200);
    CHECK((z - oracle.solutions[0]).norm() < 1e-8);

    // Every returned solution is certified by the cone membership.
    const Vector w = -(p.value(z));
    CHECK(normal_cone_contains(cone, project_box(z, cone), w, 1e-8).member);
  }
  CHECK(multiple == 0);
}

TEST_CASE("kappa estimation on linear instances") {
  MixedAvi ident(vec({-1}), Matrix::Identity(1, 1), Box::free(1));
  const auto est1 = estimate_kappa(ident, vec({1}), 0.5, 40, 3);
  CHECK(est1.kappa == doctest::Approx(1.0).epsilon(1e-9));

  MixedAvi twice(vec({-1}), 2.0 * Matrix::Identity(1, 1), Box::free(1));
  const auto est2 = estimate_kappa(twice, vec({0.5}), 0.5, 40, 3);
  CHECK(est2.kappa == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(est2.pattern_inverse_max() == doctest::Approx(0.5));
}

TEST_CASE("kappa stays below the inverse-norm bound for SPD instances") {
  Rng rng(99);
  const Matrix m = random_spd(rng, 3);
  const Vector a = vec({-0.3, 0.2, -0.1});
  const Box cone = Box::bounds(0, 1, 3);
  MixedAvi p(a, m, cone);
  const auto sols = solve_avi_enumerate(p);
  REQUIRE(sols.solutions.size() == 1);
  const Vector zbar = sols.solutions[0];

  const auto est = estimate_kappa(p, zbar, 0.05, 60, 5);
  const double bound = m.inverse().norm();  // spectral bound via Frobenius
  Eigen::JacobiSVD<Matrix> svd(m);
  const double spectral = 1.0 / svd.singularValues().minCoeff();
  CHECK(est.kappa <= spectral * (1.0 + 1e-9));
  CHECK(est.kappa <= bound * (1.0 + 1e-9));
}

TEST_CASE("monotone instances have a unique enumeration solution") {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(500 + trial);
    const int dim = 2 + trial % 3;
    const Matrix m = random_spd(rng, dim);
    Vector a(dim);
    for (int i = 0; i < dim; ++i) a[i] = rng.uniform(-1.0, 1.0);
    MixedAvi p(a, m, Box::nonnegative(dim));
    CHECK(solve_avi_enumerate(p).solutions.size() == 1);
  }
}
