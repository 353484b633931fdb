#include "s2gpt/greedy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "s2gpt/errors.hpp"
#include "s2gpt/parallel.hpp"

namespace s2gpt {

double SweepRecord::worst() const {
  double w = -std::numeric_limits<double>::infinity();
  for (double d : delta) w = std::isfinite(d) ? std::max(w, d) : std::numeric_limits<double>::infinity();
  return w;
}

std::size_t select_next(const std::vector<double>& delta, const std::vector<char>& excluded) {
  std::size_t best = delta.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (i < excluded.size() && excluded[i]) continue;
    const double v = std::isfinite(delta[i]) ? delta[i] : std::numeric_limits<double>::infinity();
    if (best == delta.size() || v > best_value) {
      best = i;
      best_value = v;
    }
  }
  if (best == delta.size()) throw ExhaustionError("every training parameter has been used or rejected");
  return best;
}

SweepRecord sweep(const MetaArtifact& artifact, const PdeSpec& pde, const CollocationGrid& grid,
                  std::size_t width, const OnlineConfig& online, std::size_t threads) {
  const ReducedBasis basis = truncated(artifact.basis, width);
  const BasisTables tables = precompute_sparse_tables(basis, artifact.snapshots, grid, pde);
  const Eigen::VectorXd c0 = initial_guess(artifact.basis, width);
  const std::size_t count = artifact.train.size();
  SweepRecord r;
  r.width = width;
  r.delta.assign(count, 0.0);
  r.epochs.assign(count, 0);
  r.diverged.assign(count, 0);
  const auto start = std::chrono::steady_clock::now();
  parallel_for(count, threads, [&](std::size_t k) {
    const auto sol = train_online(tables, pde, artifact.train[k], c0, online);
    r.delta[k] = sol.loss;
    r.epochs[k] = sol.epochs;
    r.diverged[k] = sol.diverged;
  });
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

OfflineResult offline_run(const PdeSpec& pde, const CollocationGrid& grid,
                          const std::vector<std::vector<double>>& train, const GreedyConfig& config) {
  if (config.n_basis == 0) throw ConfigError("n_basis must be at least 1");
  if (train.size() < config.n_basis)
    throw ConfigError("training set has " + std::to_string(train.size()) + " parameters, fewer than n_basis = " +
                      std::to_string(config.n_basis));
  for (const auto& mu : train) pde.check_parameters(mu);

  OfflineResult out;
  MetaArtifact& art = out.artifact;
  GreedyTrace& trace = out.trace;
  art.pde = std::string(pde.name());
  art.resolution = grid.resolution;
  art.train = train;
  art.basis = ReducedBasis(grid.size());
  trace.seed = config.seed;

  std::vector<char> excluded(train.size(), 0);
  double fom_total = 0.0, sweep_total = 0.0;

  // Trains the FOM at train[k] and augments the basis; false when the
  // snapshot adds nothing to the current span.
  const auto try_add = [&](std::size_t k, GreedyStep& step) {
    excluded[k] = 1;
    Snapshot snap = train_full_pinn(pde, train[k], grid, config.net, config.fom);
    fom_total += snap.seconds;
    try {
      geim_step(art.basis, snap.tables[Slot::U], train[k]);
    } catch (const DegenerateError&) {
      step.skipped.push_back(k);
      return false;
    }
    step.n = art.basis.size();
    step.train_index = k;
    step.mu = train[k];
    step.magic_point = art.basis.magic.back();
    if (step.n > 1) {
      try {
        eim_step(art.basis, residual_field(pde, train[k], grid, snap.tables), residual_eligibility(art.basis, grid));
        step.residual_point = art.basis.residual_points.back();
      } catch (const DegenerateError&) {
        step.residual_degenerate = true;
      }
    }
    step.fom_loss = snap.loss;
    step.fom_seconds = snap.seconds;
    art.snapshots.push_back(std::move(snap));
    return true;
  };

  const auto finish = [&](GreedyStep step) {
    step.offline_fom_seconds = fom_total;
    step.offline_sweep_seconds = sweep_total;
    trace.steps.push_back(std::move(step));
    if (config.on_step) config.on_step(art, trace);
  };

  std::mt19937_64 rng(config.seed);
  {
    GreedyStep step;
    for (;;) {
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < train.size(); ++i)
        if (!excluded[i]) open.push_back(i);
      if (open.empty()) throw ExhaustionError("no training parameter produced a usable first snapshot");
      if (try_add(open[rng() % open.size()], step)) break;
    }
    finish(std::move(step));
  }

  for (std::size_t n = 2; n <= config.n_basis; ++n) {
    trace.sweeps.push_back(sweep(art, pde, grid, n - 1, config.online, config.threads));
    const SweepRecord& s = trace.sweeps.back();
    sweep_total += s.seconds;
    GreedyStep step;
    for (;;) {
      const std::size_t k = select_next(s.delta, excluded);
      step.worst_delta = s.delta[k];
      if (try_add(k, step)) break;
    }
    finish(std::move(step));
  }

  if (config.final_sweep) {
    trace.sweeps.push_back(sweep(art, pde, grid, config.n_basis, config.online, config.threads));
    sweep_total += trace.sweeps.back().seconds;
    trace.steps.back().offline_sweep_seconds = sweep_total;
  }
  return out;
}

}  // namespace s2gpt
