#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <span>
#include <vector>

#include "s2gpt/full_pinn.hpp"
#include "s2gpt/optim.hpp"
#include "s2gpt/pinn_loss.hpp"
#include "s2gpt/reduction.hpp"

namespace s2gpt {

/// Slot values of n basis fields at a list of grid points: one
/// (points x n) matrix per present slot.
struct BasisTables {
  std::vector<std::size_t> indices;
  std::vector<Point> points;
  SlotSet present;
  std::array<Eigen::MatrixXd, kSlotCount> values;
  /// Value each field takes where the initial condition is imposed, relative
  /// to u0: beta row sums for the interpolatory basis, ones for raw snapshots.
  Eigen::VectorXd row_sums;

  std::size_t rows() const { return indices.size(); }
  std::size_t width() const { return std::size_t(row_sums.size()); }
  const Eigen::MatrixXd& operator[](Slot s) const;
  /// Slot values of sum_i c_i * field_i at every row.
  Jet combine(const Eigen::VectorXd& c) const;
};

/// Raw snapshot tables (first `width` snapshots) at the given grid indices.
BasisTables raw_tables(std::span<const Snapshot> snapshots, std::size_t width,
                       const CollocationGrid& grid, const std::vector<std::size_t>& indices,
                       SlotSet slots);

/// Interpolatory basis tables: raw tables combined through beta.
BasisTables basis_tables(const ReducedBasis& basis, std::span<const Snapshot> snapshots,
                         const CollocationGrid& grid, const std::vector<std::size_t>& indices,
                         SlotSet slots);

/// Basis tables on the sparse collocation set, for the residual slots.
BasisTables precompute_sparse_tables(const ReducedBasis& basis, std::span<const Snapshot> snapshots,
                                     const CollocationGrid& grid, const PdeSpec& pde);

/// Copy of the first n steps of a basis (n magic points, n - 1 residual
/// points when available).
ReducedBasis truncated(const ReducedBasis& basis, std::size_t n);

struct S2gptLossOptions {
  /// Extra weight on (sum c_i s_i - 1)^2 standing in for a boundary row-sum
  /// term; only applied to problems with inhomogeneous boundary data.
  double boundary_row_sum = 0.0;
};

struct MetaLoss {
  double loss = 0.0;
  double residual = 0.0;
  double initial = 0.0;
  Eigen::VectorXd grad;
};

/// Mean squared residual over the tables' rows plus, for time-dependent
/// problems, (sum_i c_i s_i - 1)^2.
MetaLoss s2gpt_loss_grad(const Eigen::VectorXd& c, const BasisTables& tables, const PdeSpec& pde,
                         std::span<const double> mu, const S2gptLossOptions& options = {});

/// c0 = [alpha^(n), 0]; c0 = [0] for n = 1.
Eigen::VectorXd initial_guess(const ReducedBasis& basis, std::size_t n);

enum class OnlineMethod { GradientDescent, Adam, Lbfgs };

struct OnlineConfig {
  OnlineMethod method = OnlineMethod::Lbfgs;
  OptimConfig optim{.learning_rate = 1.0, .epochs = 200, .grad_tol = 1e-10};
  S2gptLossOptions loss;
};

struct MetaSolution {
  Eigen::VectorXd c;
  double loss = 0.0;
  std::vector<double> history;
  double seconds = 0.0;  // optimizer loop only
  std::size_t epochs = 0;
  OptimStatus status = OptimStatus::MaxEpochs;
  bool diverged = false;
};

using MetaOracle = std::function<MetaLoss(const Eigen::VectorXd&)>;

/// Minimizes a reduced loss from c0. A diverged run returns the last finite
/// iterate with `diverged` set.
MetaSolution train_reduced(const MetaOracle& loss, const Eigen::VectorXd& c0, const OnlineConfig& config);

MetaSolution train_online(const BasisTables& tables, const PdeSpec& pde, std::span<const double> mu,
                          const Eigen::VectorXd& c0, const OnlineConfig& config);

/// Raw snapshot tables on the interior, initial and boundary partitions.
struct GptTables {
  BasisTables interior;
  BasisTables initial;
  BasisTables boundary;
};

GptTables gpt_tables(std::span<const Snapshot> snapshots, std::size_t width,
                     const CollocationGrid& grid, const PdeSpec& pde);

/// Full PINN loss of sum_i c_i * snapshot_i over every partition, with the
/// same weighting as pinn_loss_grad.
MetaLoss gpt_loss_grad(const Eigen::VectorXd& c, const GptTables& tables, const PdeSpec& pde,
                       std::span<const double> mu, const LossWeights& weights = {});

MetaSolution train_gpt(const GptTables& tables, const PdeSpec& pde, std::span<const double> mu,
                       const Eigen::VectorXd& c0, const OnlineConfig& config,
                       const LossWeights& weights = {});

/// sum_i c_i xi_i on the full grid.
Eigen::VectorXd reconstruct(const Eigen::VectorXd& c, const ReducedBasis& basis);

/// sum_i c_i snapshot_i (u values) on the full grid.
Eigen::VectorXd reconstruct_raw(const Eigen::VectorXd& c, std::span<const Snapshot> snapshots);

}  // namespace s2gpt
