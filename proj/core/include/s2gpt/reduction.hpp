#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "s2gpt/diffnet.hpp"
#include "s2gpt/grid.hpp"
#include "s2gpt/pde.hpp"

namespace s2gpt {

/// Interpolatory basis built from full-grid snapshot values.
///
/// Column i of `xi` is sum_{l <= i} beta(i, l) * snapshot_l and equals 1 at
/// magic[i] and 0 at every earlier magic point. `residuals` holds the
/// orthogonalized residual fields with the same structure relative to
/// `residual_points`.
struct ReducedBasis {
  std::size_t grid_size = 0;
  Eigen::MatrixXd xi;    // grid_size x n
  Eigen::MatrixXd beta;  // n x n, lower triangular
  std::vector<std::size_t> magic;
  std::vector<std::size_t> residual_points;
  std::vector<Eigen::VectorXd> alphas;  // alphas[i] has length i
  Eigen::MatrixXd residuals;            // grid_size x residual_points.size()
  std::vector<std::vector<double>> mu;

  explicit ReducedBasis(std::size_t n_points = 0);
  std::size_t size() const { return magic.size(); }
  /// Row sums of beta.
  Eigen::VectorXd beta_sums() const;
};

struct GeimStep {
  std::size_t point = 0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta_row;
  double scale = 0.0;  // pre-normalization value at `point`
};

/// Relative threshold below which an orthogonalized field counts as zero.
inline constexpr double kDegenerateTolerance = 1e-10;

/// Orthogonalizes `raw` against the basis at the magic points, picks the
/// largest remaining value (lowest index on ties; points already in the
/// sparse set are skipped) and appends the normalized field. Throws
/// DegenerateError, leaving the basis untouched, when nothing is left.
GeimStep geim_step(ReducedBasis& basis, const Eigen::VectorXd& raw, std::span<const double> mu);

struct EimStep {
  std::size_t point = 0;
  Eigen::VectorXd alpha;
  double scale = 0.0;
};

/// Same construction for residual fields. Only indices with
/// `eligible[i] != 0` may be chosen; see residual_eligibility.
EimStep eim_step(ReducedBasis& basis, const Eigen::VectorXd& residual,
                 const std::vector<char>& eligible);

/// Interior grid points not yet in the sparse set.
std::vector<char> residual_eligibility(const ReducedBasis& basis, const CollocationGrid& grid);

/// Strong-form residual of a snapshot at interior points; 0 on the boundary
/// and initial partitions.
Eigen::VectorXd residual_field(const PdeSpec& pde, std::span<const double> mu,
                               const CollocationGrid& grid, const Jet& tables);

/// Magic points followed by residual points.
std::vector<std::size_t> sparse_set(const ReducedBasis& basis);

/// Index of the largest |v[i]| among allowed entries, lowest index on ties.
/// Returns v.size() when nothing is allowed.
std::size_t argmax_abs(const Eigen::VectorXd& v, const std::vector<char>& allowed);

}  // namespace s2gpt
