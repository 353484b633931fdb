#include "s2gpt/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "s2gpt/errors.hpp"

namespace s2gpt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

ReducedBasis::ReducedBasis(std::size_t n_points)
    : grid_size(n_points),
      xi(Eigen::Index(n_points), 0),
      beta(0, 0),
      residuals(Eigen::Index(n_points), 0) {}

VectorXd ReducedBasis::beta_sums() const { return beta.rowwise().sum(); }

std::size_t argmax_abs(const VectorXd& v, const std::vector<char>& allowed) {
  std::size_t best = std::size_t(v.size());
  double best_value = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!allowed[std::size_t(i)]) continue;
    const double a = std::abs(v[i]);
    if (a > best_value) {
      best_value = a;
      best = std::size_t(i);
    }
  }
  return best;
}

namespace {

// Coefficients of the interpolant of `target` on the columns of `basis`,
// whose values at `points` form a unit lower-triangular matrix.
VectorXd interpolate(const MatrixXd& basis, const std::vector<std::size_t>& points,
                     const VectorXd& target) {
  const auto n = Eigen::Index(points.size());
  VectorXd alpha(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto row = Eigen::Index(points[std::size_t(j)]);
    double v = target[row];
    for (Eigen::Index k = 0; k < j; ++k) v -= basis(row, k) * alpha[k];
    alpha[j] = v;
  }
  return alpha;
}

void check_length(const ReducedBasis& basis, const VectorXd& v, const char* what) {
  if (std::size_t(v.size()) != basis.grid_size)
    throw std::invalid_argument(std::string(what) + " has " + std::to_string(v.size()) +
                                " entries, basis grid has " + std::to_string(basis.grid_size));
}

void append_column(MatrixXd& m, const VectorXd& column) {
  m.conservativeResize(Eigen::NoChange, m.cols() + 1);
  m.col(m.cols() - 1) = column;
}

}  // namespace

GeimStep geim_step(ReducedBasis& basis, const VectorXd& raw, std::span<const double> mu) {
  check_length(basis, raw, "snapshot");
  const auto n = Eigen::Index(basis.size());
  const VectorXd alpha = interpolate(basis.xi, basis.magic, raw);
  VectorXd field = raw - basis.xi * alpha;

  std::vector<char> allowed(basis.grid_size, 1);
  for (std::size_t i : basis.magic) allowed[i] = 0;
  for (std::size_t i : basis.residual_points) allowed[i] = 0;
  const std::size_t point = argmax_abs(field, allowed);
  const double raw_max = raw.size() ? raw.cwiseAbs().maxCoeff() : 0.0;
  if (point == basis.grid_size || !(std::abs(field[Eigen::Index(point)]) > kDegenerateTolerance * raw_max))
    throw DegenerateError("snapshot lies in the span of the current basis");

  const double scale = field[Eigen::Index(point)];
  field /= scale;
  VectorXd beta_row = VectorXd::Zero(n + 1);
  beta_row[n] = 1.0;
  if (n > 0) beta_row.head(n) -= basis.beta.transpose() * alpha;
  beta_row /= scale;

  append_column(basis.xi, field);
  basis.beta.conservativeResize(n + 1, n + 1);
  basis.beta.col(n).setZero();
  basis.beta.row(n) = beta_row.transpose();
  basis.magic.push_back(point);
  basis.alphas.push_back(alpha);
  basis.mu.emplace_back(mu.begin(), mu.end());
  return {point, alpha, beta_row, scale};
}

EimStep eim_step(ReducedBasis& basis, const VectorXd& residual, const std::vector<char>& eligible) {
  check_length(basis, residual, "residual");
  if (eligible.size() != basis.grid_size) throw std::invalid_argument("eligibility mask size mismatch");
  const VectorXd alpha = interpolate(basis.residuals, basis.residual_points, residual);
  VectorXd field = residual - basis.residuals * alpha;
  const std::size_t point = argmax_abs(field, eligible);
  const double r_max = residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0;
  if (point == basis.grid_size || !(std::abs(field[Eigen::Index(point)]) > kDegenerateTolerance * r_max))
    throw DegenerateError("residual field vanishes outside the excluded points");

  const double scale = field[Eigen::Index(point)];
  field /= scale;
  append_column(basis.residuals, field);
  basis.residual_points.push_back(point);
  return {point, alpha, scale};
}

std::vector<char> residual_eligibility(const ReducedBasis& basis, const CollocationGrid& grid) {
  if (grid.size() != basis.grid_size) throw std::invalid_argument("grid does not match basis");
  std::vector<char> mask(grid.size(), 0);
  for (std::size_t i : grid.interior) mask[i] = 1;
  for (std::size_t i : basis.magic) mask[i] = 0;
  for (std::size_t i : basis.residual_points) mask[i] = 0;
  return mask;
}

VectorXd residual_field(const PdeSpec& pde, std::span<const double> mu, const CollocationGrid& grid,
                        const Jet& tables) {
  pde.check_parameters(mu);
  if (tables.size() != grid.size()) throw std::invalid_argument("tables do not match grid");
  VectorXd r = VectorXd::Zero(Eigen::Index(grid.size()));
  for (std::size_t i : grid.interior) {
    const double v = pde.residual(tables.at(i), mu, grid.points[i]);
    if (!std::isfinite(v)) throw NumericalError("non-finite residual at grid point " + std::to_string(i));
    r[Eigen::Index(i)] = v;
  }
  return r;
}

std::vector<std::size_t> sparse_set(const ReducedBasis& basis) {
  std::vector<std::size_t> set = basis.magic;
  set.insert(set.end(), basis.residual_points.begin(), basis.residual_points.end());
  std::vector<std::size_t> sorted = set;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw_consistency("sparse collocation set contains a duplicate point");
  return set;
}

}  // namespace s2gpt
