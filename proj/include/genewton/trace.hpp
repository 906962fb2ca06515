#pragma once

#include "genewton/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace genewton {

enum class StepStatus {
  kOk,
  kNonUniqueSubproblem,  // oracle found multiple subproblem solutions
  kXBlockGap,            // multistep outer step left the x-rows inconsistent
  kMaxIterExceeded,
  kSingularPattern,
  kInnerSolveFailed,
  kDiverged,
};

const char* to_string(StepStatus s);
// Warnings are recorded but do not halt a run.
bool is_hard_failure(StepStatus s);

// Record of one solver run: iterates, the disturbances applied between them,
// residuals of the nominal problem, and optional named side channels.
struct Trace {
  std::vector<Vector> iterates;
  std::vector<Vector> disturbances;
  std::vector<double> residuals;       // one per iterate
  std::vector<StepStatus> step_status; // one per step
  std::vector<double> errors_to_zbar;  // one per iterate; empty if zbar unknown

  // Named series: per-step channels (e.g. "inner_error", "dual_update_gap",
  // "x_block_margin") or per-iterate channels (e.g. "b_error", "y_error").
  std::map<std::string, std::vector<double>> extras;

  int steps() const { return static_cast<int>(disturbances.size()); }
  bool has_errors() const { return !errors_to_zbar.empty(); }
  bool completed_ok() const;
  StepStatus final_status() const;
  std::vector<double> disturbance_norms() const;

  // Checks the length invariants (iterates = disturbances + 1, ...).
  void validate() const;
};

}  // namespace genewton
