#include "genewton/trace.hpp"

namespace genewton {

const char* to_string(StepStatus s) {
  switch (s) {
    case StepStatus::kOk: return "ok";
    case StepStatus::kNonUniqueSubproblem: return "non_unique_subproblem";
    case StepStatus::kXBlockGap: return "x_block_gap";
    case StepStatus::kMaxIterExceeded: return "max_iter_exceeded";
    case StepStatus::kSingularPattern: return "singular_pattern";
    case StepStatus::kInnerSolveFailed: return "inner_solve_failed";
    case StepStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

bool is_hard_failure(StepStatus s) {
  switch (s) {
    case StepStatus::kOk:
    case StepStatus::kNonUniqueSubproblem:
    case StepStatus::kXBlockGap:
      return false;
    default:
      return true;
  }
}

bool Trace::completed_ok() const {
  for (StepStatus s : step_status) {
    if (is_hard_failure(s)) return false;
  }
  return true;
}

StepStatus Trace::final_status() const {
  return step_status.empty() ? StepStatus::kOk : step_status.back();
}

std::vector<double> Trace::disturbance_norms() const {
  std::vector<double> out;
  out.reserve(disturbances.size());
  for (const Vector& v : disturbances) out.push_back(v.norm());
  return out;
}

void Trace::validate() const {
  require(iterates.size() == disturbances.size() + 1,
          "Trace: iterates must have one more entry than disturbances");
  require(residuals.size() == iterates.size(),
          "Trace: one residual per iterate");
  require(step_status.size() == disturbances.size(),
          "Trace: one status per step");
  require(errors_to_zbar.empty() || errors_to_zbar.size() == iterates.size(),
          "Trace: one error per iterate when zbar is known");
}

}  // namespace genewton
