#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "s2gpt/full_pinn.hpp"
#include "s2gpt/meta_model.hpp"
#include "s2gpt/reduction.hpp"

namespace s2gpt {

/// Everything the online stage needs: the snapshots, the interpolatory basis
/// and the grid they live on.
struct MetaArtifact {
  std::string pde;
  PdeOptions pde_options;
  GridResolution resolution;
  std::vector<std::vector<double>> train;
  std::vector<Snapshot> snapshots;
  ReducedBasis basis;
};

/// Reduced-model losses over the training set at one basis width.
struct SweepRecord {
  std::size_t width = 0;
  std::vector<double> delta;
  std::vector<std::size_t> epochs;
  std::vector<char> diverged;
  double seconds = 0.0;

  double worst() const;
};

inline constexpr std::size_t kNoPoint = std::numeric_limits<std::size_t>::max();

struct GreedyStep {
  std::size_t n = 0;  // basis size after this step
  std::size_t train_index = 0;
  std::vector<double> mu;
  double worst_delta = std::numeric_limits<double>::quiet_NaN();  // sweep that chose mu
  std::size_t magic_point = 0;
  std::size_t residual_point = kNoPoint;  // kNoPoint at n = 1 or on a degenerate residual
  bool residual_degenerate = false;
  std::vector<std::size_t> skipped;  // degenerate candidates passed over
  double fom_loss = 0.0;
  double fom_seconds = 0.0;
  double offline_fom_seconds = 0.0;    // cumulative
  double offline_sweep_seconds = 0.0;  // cumulative
};

struct GreedyTrace {
  std::uint64_t seed = 0;
  std::vector<GreedyStep> steps;
  std::vector<SweepRecord> sweeps;  // sweeps[w - 1] used width w
};

struct GreedyConfig {
  std::size_t n_basis = 8;
  std::uint64_t seed = 0;
  NetConfig net;
  FomConfig fom;
  OnlineConfig online;
  std::size_t threads = 1;  // sweep parallelism
  bool final_sweep = true;  // also sweep at full width
  std::function<void(const MetaArtifact&, const GreedyTrace&)> on_step;
};

/// Largest delta among candidates not excluded; non-finite values count as
/// +infinity and ties go to the lowest index. Throws ExhaustionError when
/// every candidate is excluded.
std::size_t select_next(const std::vector<double>& delta, const std::vector<char>& excluded);

/// Online training at every training parameter with the first `width` basis
/// functions, warm-started from initial_guess.
SweepRecord sweep(const MetaArtifact& artifact, const PdeSpec& pde, const CollocationGrid& grid,
                  std::size_t width, const OnlineConfig& online, std::size_t threads);

struct OfflineResult {
  MetaArtifact artifact;
  GreedyTrace trace;
};

/// Greedy offline stage: seeded first parameter, then sweep / select / train
/// FOM / GEIM / EIM until the basis holds `n_basis` functions.
OfflineResult offline_run(const PdeSpec& pde, const CollocationGrid& grid,
                          const std::vector<std::vector<double>>& train, const GreedyConfig& config);

}  // namespace s2gpt
