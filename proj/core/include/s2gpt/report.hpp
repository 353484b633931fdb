#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "s2gpt/config.hpp"
#include "s2gpt/metrics.hpp"
#include "s2gpt/store.hpp"

namespace s2gpt {

/// Tables for repeated online queries against one artifact; building them is
/// the only per-artifact cost, so they are kept apart from query timing.
class OnlineModel {
public:
  OnlineModel(const MetaArtifact& artifact, OnlineConfig online, LossWeights weights, bool baseline);

  const PdeSpec& pde() const { return *pde_; }
  const CollocationGrid& grid() const { return grid_; }
  const MetaArtifact& artifact() const { return *artifact_; }
  const BasisTables& sparse_tables() const { return sparse_; }
  std::size_t width() const { return artifact_->basis.size(); }
  bool has_baseline() const { return gpt_.has_value(); }

  MetaSolution solve(std::span<const double> mu) const;
  MetaSolution solve_gpt(std::span<const double> mu) const;

  /// Interpolatory combination on the full grid.
  Eigen::VectorXd field(const Eigen::VectorXd& c) const;
  Eigen::VectorXd gpt_field(const Eigen::VectorXd& c) const;
  /// s2gpt loss of c with the residual taken at every interior grid point (the
  /// full PINN's residual collocation set) instead of X^m.
  double full_grid_loss(const Eigen::VectorXd& c, std::span<const double> mu) const;
  /// Exact solution on the grid when the problem has one.
  std::optional<Eigen::VectorXd> exact_field(std::span<const double> mu) const;

private:
  const MetaArtifact* artifact_;
  PdePtr pde_;
  CollocationGrid grid_;
  OnlineConfig online_;
  LossWeights weights_;
  BasisTables sparse_;
  BasisTables full_;
  std::optional<GptTables> gpt_;
  Eigen::VectorXd c0_;
};

/// Greedy offline stage for a config, then a full store under
/// config.output_dir (rewritten after every step when checkpointing).
/// Progress lines go to `log` when given.
OfflineResult run_offline(const RunConfig& config, std::ostream* log = nullptr);

struct OnlineRow {
  std::vector<double> mu;
  MetaSolution s2gpt;
  std::optional<MetaSolution> gpt;
  std::optional<ErrorMetrics> vs_snapshot;  // mu is one of the selected parameters
  std::optional<ErrorMetrics> vs_exact;
  std::optional<ErrorMetrics> gpt_vs_exact;
};

/// Online queries against a saved store. Writes online.csv and one field
/// file per query into `out_dir`.
std::vector<OnlineRow> run_online(const std::filesystem::path& store,
                                  const std::vector<std::vector<double>>& mus, bool baseline,
                                  const std::filesystem::path& out_dir, std::ostream* log = nullptr);

struct BenchmarkSummary {
  OfflineResult offline;
  std::vector<std::vector<double>> test;
  std::vector<double> s2gpt_seconds;  // per test query
  std::vector<double> gpt_seconds;
  double fom_seconds_mean = 0.0;
};

/// Offline stage plus a held-out test sweep; writes the report CSVs into
/// `<output_dir>/report`.
BenchmarkSummary run_benchmark(const RunConfig& config, std::ostream* log = nullptr);

/// Standalone full PINN at one parameter. Writes fom.json and fom_field.csv
/// into `out_dir`.
Snapshot run_fom(const RunConfig& config, const std::vector<double>& mu,
                 const std::filesystem::path& out_dir, std::ostream* log = nullptr);

}  // namespace s2gpt
