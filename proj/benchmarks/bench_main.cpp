// Micro benchmarks for the hot paths: jets, the full PINN loss, the sparse
// and full-grid reduced losses, and basis construction.

#include <benchmark/benchmark.h>

#include "s2gpt/errors.hpp"
#include "s2gpt/meta_model.hpp"

using namespace s2gpt;

namespace {

// Untrained snapshots are enough to time table lookups and losses.
struct Fixture {
  PdePtr pde;
  CollocationGrid grid;
  std::vector<Snapshot> snapshots;
  ReducedBasis basis;

  Fixture(const char* name, std::size_t n, GridResolution res) : pde(make_pde(name)), grid(build_grid(*pde, res)) {
    basis = ReducedBasis(grid.size());
    const auto& box = pde->parameter_box();
    for (std::uint64_t k = 0; snapshots.size() < n; ++k) {
      Snapshot s;
      for (const auto& r : box) s.mu.push_back(r.lo + (r.hi - r.lo) * double(k + 1) / double(n + 2));
      s.params = init_params(std::vector<int>{2, 20, 20, 20, 20, 1}, 100 + k);
      s.tables = snapshot_tables(s.params, grid, *pde);
      try {
        geim_step(basis, s.tables[Slot::U], s.mu);
      } catch (const DegenerateError&) {
        continue;
      }
      if (basis.size() > 1)
        eim_step(basis, residual_field(*pde, s.mu, grid, s.tables), residual_eligibility(basis, grid));
      snapshots.push_back(std::move(s));
    }
  }
};

GridResolution burgers_grid(std::size_t side) { return {side, side, side, side / 2}; }

void BM_ForwardJet(benchmark::State& state) {
  const auto pde = make_pde("burgers");
  const auto grid = build_grid(*pde, burgers_grid(static_cast<std::size_t>(state.range(0))));
  const auto params = init_params(std::vector<int>{2, 20, 20, 20, 20, 1}, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(forward_jet(params, grid.points, pde->loss_slots(), pde->layout()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
}
BENCHMARK(BM_ForwardJet)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_PinnLossGrad(benchmark::State& state) {
  const auto pde = make_pde("burgers");
  const auto grid = build_grid(*pde, burgers_grid(static_cast<std::size_t>(state.range(0))));
  const auto params = init_params(std::vector<int>{2, 20, 20, 20, 20, 1}, 1);
  const std::vector<double> mu{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(pinn_loss_grad(params, *pde, grid, mu));
}
BENCHMARK(BM_PinnLossGrad)->Arg(20)->Arg(40)->Arg(100)->Unit(benchmark::kMillisecond);

// Sparse online loss at basis width n on a fixed grid: cost depends on n only.
void BM_S2gptLossGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  static Fixture f("burgers", 12, burgers_grid(40));
  const ReducedBasis b = truncated(f.basis, n);
  const BasisTables t = precompute_sparse_tables(b, f.snapshots, f.grid, *f.pde);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 0.1);
  const std::vector<double> mu{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(s2gpt_loss_grad(c, t, *f.pde, mu));
}
BENCHMARK(BM_S2gptLossGrad)->DenseRange(2, 12, 2);

// Full-grid GPT loss at the same widths, for comparison.
void BM_GptLossGrad(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  static Fixture f("burgers", 12, burgers_grid(40));
  const GptTables t = gpt_tables(f.snapshots, n, f.grid, *f.pde);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 0.1);
  const std::vector<double> mu{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(gpt_loss_grad(c, t, *f.pde, mu));
}
BENCHMARK(BM_GptLossGrad)->DenseRange(2, 12, 2);

void BM_PrecomputeSparseTables(benchmark::State& state) {
  static Fixture f("burgers", 12, burgers_grid(40));
  for (auto _ : state) benchmark::DoNotOptimize(precompute_sparse_tables(f.basis, f.snapshots, f.grid, *f.pde));
}
BENCHMARK(BM_PrecomputeSparseTables);

void BM_GeimStep(benchmark::State& state) {
  static Fixture f("burgers", 12, burgers_grid(40));
  const auto n = static_cast<std::size_t>(state.range(0));
  const ReducedBasis base = truncated(f.basis, n);
  const Eigen::VectorXd& raw = f.snapshots[n].tables[Slot::U];
  for (auto _ : state) {
    ReducedBasis b = base;
    benchmark::DoNotOptimize(geim_step(b, raw, f.snapshots[n].mu));
  }
}
BENCHMARK(BM_GeimStep)->Arg(2)->Arg(6)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
