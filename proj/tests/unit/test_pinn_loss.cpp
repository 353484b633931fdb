#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "s2gpt/pinn_loss.hpp"
#include "support/oracles.hpp"

using namespace s2gpt;
using s2gpt::oracle::Rng;
using s2gpt::oracle::rel_error;

namespace {

struct Case {
  const char* name;
  std::vector<double> mu;
  GridResolution res;
};

std::vector<Case> cases() {
  return {{"klein_gordon", {-1.4, 0.3, 0.6}, {6, 5, 7, 4}},
          {"allen_cahn", {5e-4, 2.0}, {6, 5, 7, 4}},
          {"burgers", {0.2}, {6, 5, 7, 4}},
          {"helmholtz", {1.5, 2.5}, {6, 6, 0, 4}}};
}

}  // namespace

TEST(PinnLoss, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (const auto& c : cases()) {
    auto pde = make_pde(c.name);
    const auto grid = build_grid(*pde, c.res);
    const int layers[] = {2, 8, 8, 1};
    auto params = init_params(layers, 17);
    for (auto& b : params.biases) b = rng.vector(b.size(), -0.2, 0.2);
    PinnLossOptions opt;
    opt.chunk = 16;
    const auto lg = pinn_loss_grad(params, *pde, grid, c.mu, opt);
    const Eigen::VectorXd theta = params.flatten();
    const auto loss_at = [&](const Eigen::VectorXd& t) {
      MlpParams q = params;
      q.assign(t);
      return pinn_loss(q, *pde, grid, c.mu, opt).total();
    };
    EXPECT_NEAR(loss_at(theta), lg.loss, 1e-12 * std::max(1.0, lg.loss));
    const double scale = lg.grad.lpNorm<Eigen::Infinity>();
    for (int trial = 0; trial < 20; ++trial) {
      const auto k = Eigen::Index(rng.index(std::size_t(theta.size())));
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += 1e-6;
      tm[k] -= 1e-6;
      const double fd = (loss_at(tp) - loss_at(tm)) / 2e-6;
      EXPECT_LE(rel_error(lg.grad[k], fd, 1e-2 * scale), 1e-5) << c.name << " coordinate " << k;
    }
  }
}

TEST(PinnLoss, ZeroNetworkBurgers) {
  auto pde = make_pde("burgers");
  const GridResolution res{20, 10, 100, 8};
  const auto grid = build_grid(*pde, res);
  const int layers[] = {2, 5, 1};
  const auto params = zero_params(layers);
  const std::vector<double> mu{0.3};
  const auto terms = pinn_loss(params, *pde, grid, mu);
  // Quadrature of sin^2(pi x) over the configured initial nodes.
  double mean = 0.0;
  for (std::size_t i = 1; i <= res.n_initial; ++i) {
    const double x = -1.0 + 2.0 * double(i) / double(res.n_initial + 1);
    mean += std::pow(std::sin(std::numbers::pi * x), 2);
  }
  mean /= double(res.n_initial);
  EXPECT_EQ(terms.residual, 0.0);
  EXPECT_EQ(terms.boundary, 0.0);
  EXPECT_NEAR(terms.initial, mean, 1e-14);
  EXPECT_NEAR(terms.initial, 0.505, 1e-12);
}

TEST(PinnLoss, ExactHelmholtzJetsHaveZeroLoss) {
  auto pde = make_pde("helmholtz");
  const auto grid = build_grid(*pde, {40, 40, 0, 40});
  const std::vector<double> mu{1.95, 3.95};
  const HelmholtzSolution u{1.95, 3.95};
  auto exact = [&](const std::vector<std::size_t>& idx) {
    const auto pts = grid.gather(idx);
    Jet j = Jet::zeros(pde->loss_slots(), pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const SlotVector s = u.jet(pts[i][0], pts[i][1]);
      for (Slot sl : j.present.list()) j[sl][Eigen::Index(i)] = s[index(sl)];
    }
    return std::pair{pts, j};
  };
  const auto [ip, ij] = exact(grid.interior);
  const auto [bp, bj] = exact(grid.boundary);
  const double loss = interior_term(*pde, mu, ip, ij, 1.0 / double(ip.size()), nullptr) +
                      boundary_term(*pde, bp, bj, 1.0 / double(bp.size()), nullptr);
  EXPECT_LE(loss, 1e-10);
}

TEST(PinnLoss, KleinGordonPenalisesInitialRate) {
  auto pde = make_pde("klein_gordon");
  std::vector<Point> pts{{0.5, 0.0}};
  Jet j = Jet::zeros(initial_slots(*pde), 1);
  j[Slot::U][0] = 0.5;   // matches u0(x) = x
  j[Slot::Ut][0] = 0.2;  // target 0
  EXPECT_NEAR(initial_term(*pde, pts, j, 1.0, nullptr), 0.04, 1e-15);
  EXPECT_TRUE(initial_slots(*pde).contains(Slot::Ut));
  EXPECT_FALSE(initial_slots(*make_pde("burgers")).contains(Slot::Ut));
}

TEST(PinnLoss, AllenCahnPeriodicPairs) {
  auto pde = make_pde("allen_cahn");
  std::vector<Point> pts{{-1.0, 0.5}, {1.0, 0.5}};
  Jet j = Jet::zeros(boundary_slots(*pde), 2);
  j[Slot::U] << 0.3, 0.1;
  j[Slot::Ux] << 2.0, 1.5;
  Jet adj = Jet::zeros(j.present, 2);
  const double v = boundary_term(*pde, pts, j, 1.0, &adj);
  EXPECT_NEAR(v, 0.04 + 0.25, 1e-15);
  EXPECT_NEAR(adj[Slot::U][0], 0.4, 1e-15);
  EXPECT_NEAR(adj[Slot::U][1], -0.4, 1e-15);
  EXPECT_NEAR(adj[Slot::Ux][1], -1.0, 1e-15);
}

TEST(PinnLoss, ThreadCountDoesNotChangeResult) {
  auto pde = make_pde("burgers");
  const auto grid = build_grid(*pde, {20, 20, 20, 10});
  const int layers[] = {2, 10, 10, 1};
  const auto params = init_params(layers, 4);
  const std::vector<double> mu{0.1};
  PinnLossOptions one, many;
  one.chunk = many.chunk = 37;
  many.threads = 4;
  const auto a = pinn_loss_grad(params, *pde, grid, mu, one);
  const auto b = pinn_loss_grad(params, *pde, grid, mu, many);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

TEST(PinnLoss, WeightsScaleTerms) {
  auto pde = make_pde("burgers");
  const auto grid = build_grid(*pde, {6, 6, 6, 3});
  const int layers[] = {2, 4, 1};
  const auto params = init_params(layers, 8);
  const std::vector<double> mu{0.5};
  PinnLossOptions w;
  w.weights = {2.0, 3.0, 0.5};
  const auto base = pinn_loss(params, *pde, grid, mu);
  const auto scaled = pinn_loss(params, *pde, grid, mu, w);
  EXPECT_NEAR(scaled.residual, 2.0 * base.residual, 1e-15);
  EXPECT_NEAR(scaled.initial, 3.0 * base.initial, 1e-15);
  EXPECT_NEAR(scaled.boundary, 0.5 * base.boundary, 1e-15);
}
