#pragma once

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

namespace genewton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Failure modes surfaced by the solvers. Iteration drivers catch these and
// record them as step statuses instead of unwinding the whole run.
class SolverError : public std::runtime_error {
 public:
  enum class Code {
    kMaxIterExceeded,
    kSingularPattern,
    kDimensionTooLarge,
    kInsufficientData,
    kNonUniqueSubproblem,
    kInnerSolveFailed,
  };

  SolverError(Code code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Code code() const { return code_; }

 private:
  Code code_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Norm imposed on product spaces X x Y.
inline double product_norm(const Vector& x, const Vector& y) {
  return x.norm() + y.norm();
}

}  // namespace genewton
