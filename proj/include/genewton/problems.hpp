#pragma once

#include "genewton/geneq.hpp"
#include "genewton/nlp.hpp"
#include "genewton/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace genewton {

// Where the disturbance enters the problem data.
enum class DisturbanceChannel {
  kAdditiveF,      // added to the stacked equation / KKT residual
  kAdditiveG,      // added to the constraint values g
  kAdditiveGradH,  // added to the cost gradient
  kGradientH,      // matrix noise on the linearization (quasi-Newton runs)
};

const char* to_string(DisturbanceChannel c);
std::optional<DisturbanceChannel> parse_channel(const std::string& name);

// Disturbance dimension implied by a channel for given (dim_x, dim_g);
// kGradientH carries a flattened square matrix on the KKT space.
int channel_dim(DisturbanceChannel c, int dim_x, int dim_g);

struct ProblemDefinition {
  std::string name;
  std::string description;
  bool is_nlp = false;
  int dim_x = 0;
  int dim_g = 0;  // 0 for plain generalized equations

  std::function<NlpProblem(DisturbanceChannel)> make_nlp;  // null for pure GEs
  std::function<GeneralizedEquation(DisturbanceChannel)> make_geneq;
  Vector start;  // default start, (x0; y0) for NLPs
};

const std::vector<ProblemDefinition>& problem_registry();
const ProblemDefinition* find_problem(const std::string& name);

struct ParametrizedDefinition {
  std::string name;
  std::string description;
  std::function<ParametrizedGe()> make;
};

const std::vector<ParametrizedDefinition>& parametrized_registry();
const ParametrizedDefinition* find_parametrized(const std::string& name);

// Inline problems assembled from a small registered function set, so config
// files never need a general expression parser.
struct InlineNlpSpec {
  enum class Objective { kQuadratic, kRosenbrock };
  enum class Constraint { kNone, kLinear, kCircle };

  int dim = 2;
  Objective objective = Objective::kQuadratic;
  Matrix q;  // quadratic: 0.5 x'Qx + c'x
  Vector c;
  double rosenbrock_a = 1.0;
  double rosenbrock_b = 100.0;
  Constraint constraint = Constraint::kNone;
  Matrix a;  // linear: A x - b = 0
  Vector b;
  double circle_radius_sq = 2.0;  // circle: |x|^2 - r^2 = 0
  Vector lower, upper;            // box on x; empty means free
  DisturbanceChannel channel = DisturbanceChannel::kAdditiveF;
};

NlpProblem build_inline_nlp(const InlineNlpSpec& spec);

}  // namespace genewton
