#pragma once

#include <Eigen/Dense>

namespace s2gpt {

struct ErrorMetrics {
  double rel_l2 = 0.0;  // NaN in absolute-only mode
  double abs_l2 = 0.0;
  double max_abs = 0.0;
  bool absolute_only = false;  // reference has zero norm
  Eigen::VectorXd pointwise;   // |a - b|
};

/// Errors of `a` against the reference `b`. Throws std::invalid_argument on
/// a length mismatch.
ErrorMetrics compute_error_metrics(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace s2gpt
