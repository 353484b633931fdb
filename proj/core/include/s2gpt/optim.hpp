#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

namespace s2gpt {

/// Returns f(x) and writes grad f(x) into `grad` (already sized like x).
using Oracle = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

enum class OptimStatus { Converged, MaxEpochs, LineSearchFailed, Diverged };
std::string_view status_name(OptimStatus s);

struct OptimConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 50;
  std::size_t history = 20;      // L-BFGS memory
  double grad_tol = 1e-10;       // max-norm of the gradient
  double loss_change_tol = 0.0;  // relative; 0 disables
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_line_search = 25;

  /// lr > 0 and 0 < c1 < c2 < 1; throws ConfigError otherwise.
  void validate() const;
};

struct OptimResult {
  Eigen::VectorXd x;
  double loss = 0.0;             // f(x)
  std::vector<double> history;   // f at every accepted iterate, x0 first
  OptimStatus status = OptimStatus::MaxEpochs;
  std::size_t epochs_run = 0;
  std::size_t evaluations = 0;
};

/// x <- x - lr * grad for `epochs` steps, or until the gradient tolerance.
OptimResult gd_run(const Oracle& f, Eigen::VectorXd x0, const OptimConfig& config);

/// Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8, bias-corrected).
OptimResult adam_run(const Oracle& f, Eigen::VectorXd x0, const OptimConfig& config);

/// Two-loop L-BFGS with a strong-Wolfe line search. One epoch is one outer
/// iteration, however many oracle calls its line search needs.
OptimResult lbfgs_run(const Oracle& f, Eigen::VectorXd x0, const OptimConfig& config);

}  // namespace s2gpt
