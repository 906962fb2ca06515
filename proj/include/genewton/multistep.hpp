#pragma once

#include "genewton/disturbance.hpp"
#include "genewton/geneq.hpp"
#include "genewton/trace.hpp"
#include "genewton/types.hpp"

#include <functional>
#include <optional>

namespace genewton {

// Multivariate generalized equation 0 in f(x, y, v) + N_C(x, y) solved by
// alternating an inner equation in x (f_tilde, cone_tilde) with a partial
// Newton step in y built from the operator H_y. Only H_y is ever
// materialized; the partial operator on x never enters a computation.
struct MultistepProblem {
  int dim_x = 0;
  int dim_y = 0;
  int dim_v = 0;

  // Full equation; output dimension dim_x + dim_y.
  std::function<Vector(const Vector& x, const Vector& y, const Vector& v)> f;
  Box cone = Box::free(0);  // on (x, y)

  // Inner equation in x parametrized by y; output dimension dim_x.
  std::function<Vector(const Vector& x, const Vector& y, const Vector& v)>
      f_tilde;
  Box cone_tilde = Box::free(0);  // on x
  std::function<Matrix(const Vector& x, const Vector& y, const Vector& v)>
      jac_f_tilde;  // may be null (finite differences)

  // H_y(xi, eta, v): Y -> Z', a (dim_x + dim_y) x dim_y matrix.
  std::function<Matrix(const Vector& xi, const Vector& eta, const Vector& v)>
      h_y;

  std::optional<Vector> xbar, ybar;

  Vector eval(const Vector& x, const Vector& y, const Vector& v) const;
  double residual_norm(const Vector& x, const Vector& y) const;
};

// Inner-solve accuracy: exact Newton to tolerance, a fixed number of Newton
// steps, or an exact solve plus bounded noise. Inexactness is measured
// against the exact solution and folded into the disturbance channel.
struct InnerMode {
  enum class Kind { kExact, kNewtonSteps, kNoise };
  Kind kind = Kind::kExact;
  int newton_steps = 1;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  static InnerMode exact() { return {}; }
  static InnerMode steps(int n) {
    InnerMode m;
    m.kind = Kind::kNewtonSteps;
    m.newton_steps = n;
    return m;
  }
  static InnerMode noise(double sigma, std::uint64_t seed = 0) {
    InnerMode m;
    m.kind = Kind::kNoise;
    m.sigma = sigma;
    m.seed = seed;
    return m;
  }
};

struct MultistepConfig {
  NewtonConfig newton;        // outer subproblem and run-loop settings
  double inner_tol = 1e-10;
  int inner_max_iter = 50;
  InnerMode inner = InnerMode::exact();
  double x_block_tol = 1e-8;  // consistency tolerance on the unsolved x-rows
  // Optional per-step hook (used by the ALM driver to record the closed-form
  // dual update gap).
  std::function<void(int k, const Vector& x_next, const Vector& y_k,
                     const Vector& v_k, const Vector& y_next, Trace& trace)>
      step_hook;
};

struct InnerResult {
  Vector x_next;
  double inexactness = 0.0;  // ||x_next - exact solve||; 0 in exact mode
};

// Solves the inner equation (x given y_k, v_k) warm-started from x_warm.
InnerResult inner_solve(const MultistepProblem& mp, const Vector& x_warm,
                        const Vector& y_k, const Vector& v_k,
                        const InnerMode& mode, const MultistepConfig& cfg = {},
                        int step_index = 0);
// Convenience overload starting from the known solution or zero.
Vector inner_solve(const MultistepProblem& mp, const Vector& y_k,
                   const Vector& v_k, const InnerMode& mode = InnerMode::exact(),
                   const MultistepConfig& cfg = {});

struct OuterResult {
  Vector y_next;
  // Margin of -[f_Hy]_x-rows against N_{C_x}(x_next); <= tol when the full
  // inclusion holds at (x_next, y_next).
  double x_block_margin = 0.0;
  bool x_block_consistent = true;
};

// Solves the y-rows of the partial Newton inclusion as a square AVI in y and
// checks the x-rows against the normal cone at x_next.
OuterResult outer_step(const MultistepProblem& mp, const Vector& x_next,
                       const Vector& y_k, const Vector& v_k,
                       const MultistepConfig& cfg = {});

// Alternates inner_solve and outer_step. Errors use the product norm
// ||x|| + ||y||; extras record per-iterate "x_error"/"y_error" and per-step
// "inner_error"/"x_block_margin".
Trace run_multistep(const MultistepProblem& mp, const Vector& x0,
                    const Vector& y0, const DisturbanceSequence& dist,
                    const MultistepConfig& cfg = {});

}  // namespace genewton
