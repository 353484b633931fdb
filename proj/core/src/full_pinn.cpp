#include "s2gpt/full_pinn.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "s2gpt/errors.hpp"

namespace s2gpt {

std::vector<int> default_layers(const PdeSpec& pde) {
  if (pde.name() == "klein_gordon") return {2, 40, 40, 1};
  if (pde.name() == "allen_cahn") return {2, 128, 128, 128, 128, 1};
  return {2, 20, 20, 20, 20, 1};
}

SlotSet snapshot_slots(const PdeSpec& pde) {
  return pde.loss_slots() | SlotSet{Slot::U};
}

Jet snapshot_tables(const MlpParams& params, const CollocationGrid& grid, const PdeSpec& pde) {
  return forward_jet(params, grid.points, snapshot_slots(pde), grid.layout);
}

namespace {

struct Attempt {
  MlpParams params;
  OptimResult result;
};

Attempt train_once(const PdeSpec& pde, std::span<const double> mu, const CollocationGrid& grid,
                   const std::vector<int>& layers, std::uint64_t seed, const FomConfig& config) {
  MlpParams params = init_params(layers, seed);
  PinnLossOptions opt{config.weights, config.chunk, config.threads};
  const Oracle oracle = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    params.assign(theta);
    auto lg = pinn_loss_grad(params, pde, grid, mu, opt);
    grad = std::move(lg.grad);
    return lg.loss;
  };
  Eigen::VectorXd theta = params.flatten();
  if (config.adam_warmup > 0) {
    OptimConfig adam = config.lbfgs;
    adam.epochs = config.adam_warmup;
    adam.learning_rate = config.adam_learning_rate;
    const auto warm = adam_run(oracle, theta, adam);
    if (warm.status == OptimStatus::Diverged) return {params, warm};
    theta = warm.x;
  }
  auto result = lbfgs_run(oracle, theta, config.lbfgs);
  params.assign(result.x);
  return {std::move(params), std::move(result)};
}

}  // namespace

Snapshot train_full_pinn(const PdeSpec& pde, std::span<const double> mu,
                         const CollocationGrid& grid, const NetConfig& net,
                         const FomConfig& config) {
  pde.check_parameters(mu);
  validate_layers(net.layers);
  config.lbfgs.validate();

  const auto start = std::chrono::steady_clock::now();
  std::uint64_t seed = net.seed;
  Attempt run = train_once(pde, mu, grid, net.layers, seed, config);
  if (run.result.status == OptimStatus::Diverged || !std::isfinite(run.result.loss)) {
    seed = net.seed + 1;
    run = train_once(pde, mu, grid, net.layers, seed, config);
    if (run.result.status == OptimStatus::Diverged || !std::isfinite(run.result.loss))
      throw NumericalError("full PINN training for " + std::string(pde.name()) + " diverged twice (seeds " +
                           std::to_string(net.seed) + ", " + std::to_string(seed) + ")");
  }
  const auto stop = std::chrono::steady_clock::now();

  Snapshot snap;
  snap.mu.assign(mu.begin(), mu.end());
  snap.params = std::move(run.params);
  const auto final = pinn_loss_grad(snap.params, pde, grid, mu, {config.weights, config.chunk, 1});
  snap.terms = final.terms;
  snap.loss = final.loss;
  snap.tables = snapshot_tables(snap.params, grid, pde);
  snap.seconds = std::chrono::duration<double>(stop - start).count();
  snap.seed = seed;
  snap.status = run.result.status;
  snap.epochs = run.result.epochs_run;
  return snap;
}

}  // namespace s2gpt
