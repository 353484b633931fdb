#include "s2gpt/metrics.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace s2gpt {

ErrorMetrics compute_error_metrics(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("field lengths differ: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  ErrorMetrics m;
  m.pointwise = (a - b).cwiseAbs();
  m.abs_l2 = m.pointwise.norm();
  m.max_abs = m.pointwise.size() ? m.pointwise.maxCoeff() : 0.0;
  const double ref = b.norm();
  if (ref == 0.0) {
    m.absolute_only = true;
    m.rel_l2 = std::numeric_limits<double>::quiet_NaN();
  } else {
    m.rel_l2 = m.abs_l2 / ref;
  }
  return m;
}

}  // namespace s2gpt
