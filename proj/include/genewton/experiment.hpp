#pragma once

#include "genewton/disturbance.hpp"
#include "genewton/isslab.hpp"
#include "genewton/multistep.hpp"
#include "genewton/problems.hpp"
#include "genewton/subproblem.hpp"
#include "genewton/trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace genewton {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Algorithm {
  kNewton,
  kQuasiNewton,  // gradient-perturbed Newton: matrix noise on the linearization
  kSqp,          // exact Hessian
  kSqpBfgs,
  kSqpDfp,
  kSeqConvex,
  kPgd,
  kAlm,
  kMultistep,  // the ALM realized through the two-step inclusion solver
};

const char* to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);
std::vector<std::string> algorithm_names();

struct DisturbanceSpec {
  DisturbanceSequence::Kind kind = DisturbanceSequence::Kind::kZero;
  double delta = 0.0;
  double rate = 0.5;
  std::uint64_t seed = 0;

  // "zero" | "constant:C" | "decaying:C:RATE" | "random:DELTA[:seed=N]"
  static DisturbanceSpec parse(const std::string& text);
  std::string str() const;
  DisturbanceSequence make(int dim) const;
};

struct ExperimentConfig {
  std::string problem = "scalar-eq";
  std::optional<InlineNlpSpec> inline_problem;
  Algorithm algorithm = Algorithm::kNewton;
  DisturbanceSpec disturbance;
  DisturbanceChannel channel = DisturbanceChannel::kAdditiveF;

  double tol = 1e-12;
  int max_iter = 50;
  double subproblem_tol = 1e-12;
  bool enable_oracle = false;
  double rho = 10.0;
  double pgd_alpha = 0.1;
  InnerMode inner = InnerMode::exact();
  double alm_tol = 1e-10;

  std::string out_dir;  // empty: keep results in memory only
  std::string label;    // file prefix; derived from problem/algorithm if empty

  // sweep axes; empty axes collapse to the scalar settings above
  std::vector<double> rho_grid;
  std::vector<double> delta_grid;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
};

// Key = value file with # comments; CLI flags override parsed values.
ExperimentConfig parse_config_file(const std::string& path);
void apply_config_line(ExperimentConfig& cfg, const std::string& key,
                       const std::string& value);

struct RunResult {
  Trace trace;
  bool converged = false;
  bool solver_failed = false;
  std::string status;
  int iterations = 0;
  double wall_seconds = 0.0;
  double final_residual = 0.0;
  std::optional<double> final_error;
  std::optional<double> limsup_error;
  std::optional<IssEstimate> iss;
  std::optional<QuadraticRateFit> quadratic;
  std::optional<RegularityEstimate> regularity;
  std::optional<double> rate_fit;  // median per-step contraction
  std::string summary_json;
};

RunResult run_experiment(const ExperimentConfig& cfg);

// Writes <label>_trace.csv and <label>_summary.json into dir (atomically).
// Returns the csv path.
std::string write_run_outputs(const RunResult& result,
                              const ExperimentConfig& cfg,
                              const std::string& dir);

struct SweepResult {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // deterministic order
  std::string csv;
};

SweepResult run_sweep(const ExperimentConfig& cfg);
std::string write_sweep_csv(const SweepResult& sweep,
                            const ExperimentConfig& cfg,
                            const std::string& dir);

std::string trace_to_csv(const Trace& trace);
std::string probe_to_json(const std::string& problem,
                          const SolutionMapProbe& probe,
                          const ProbeOptions& opts);

// Median of successive error ratios above the floor; NaN with fewer than
// two usable steps.
double fit_linear_rate(const std::vector<double>& errors,
                       double floor = 1e-11);

std::string format_double(double v);  // fixed "%.17g" formatting

}  // namespace genewton
