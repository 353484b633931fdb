#pragma once

#include <cstdint>
#include <vector>

#include "s2gpt/diffnet.hpp"
#include "s2gpt/grid.hpp"
#include "s2gpt/optim.hpp"
#include "s2gpt/pde.hpp"
#include "s2gpt/pinn_loss.hpp"

namespace s2gpt {

struct NetConfig {
  std::vector<int> layers{2, 20, 20, 20, 20, 1};
  std::uint64_t seed = 0;
};

/// Default network shape per family; parameter counts 1801 (klein_gordon),
/// 50049 (allen_cahn) and 1341 (burgers, helmholtz).
std::vector<int> default_layers(const PdeSpec& pde);

struct FomConfig {
  OptimConfig lbfgs{.learning_rate = 1.0, .epochs = 2000, .grad_tol = 1e-9, .loss_change_tol = 1e-13};
  std::size_t adam_warmup = 0;  // steps; 0 disables
  double adam_learning_rate = 1e-3;
  LossWeights weights;
  std::size_t threads = 1;
  std::size_t chunk = 512;
};

/// A trained full-order network and its jet tables on the whole grid.
struct Snapshot {
  std::vector<double> mu;
  MlpParams params;
  double loss = 0.0;
  LossBreakdown terms;
  Jet tables;
  double seconds = 0.0;
  std::uint64_t seed = 0;
  OptimStatus status = OptimStatus::MaxEpochs;
  std::size_t epochs = 0;
};

/// U plus every slot the PDE's loss reads.
SlotSet snapshot_slots(const PdeSpec& pde);

Jet snapshot_tables(const MlpParams& params, const CollocationGrid& grid, const PdeSpec& pde);

/// Optional Adam warm start, then L-BFGS on the full PINN loss. A diverged
/// run is retried once from seed + 1; a second divergence throws
/// NumericalError.
Snapshot train_full_pinn(const PdeSpec& pde, std::span<const double> mu,
                         const CollocationGrid& grid, const NetConfig& net,
                         const FomConfig& config);

}  // namespace s2gpt
