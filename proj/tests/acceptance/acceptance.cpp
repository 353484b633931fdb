// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. `acceptance 2 3` runs a subset. Criteria 5-9 share the desk Burgers
// run of criterion 6, which is built on first use.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "s2gpt/config.hpp"
#include "s2gpt/errors.hpp"
#include "s2gpt/report.hpp"
#include "support/interpolation_oracle.hpp"
#include "support/oracles.hpp"

using namespace s2gpt;
using Eigen::VectorXd;
using oracle::rel_error;
using oracle::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3e", v); }

// ---- 1. sparsity ledger ---------------------------------------------------

Outcome sparsity_ledger() {
  const std::vector<std::pair<std::string, std::size_t>> expected{
      {"klein_gordon", 12}, {"allen_cahn", 12}, {"burgers", 10}, {"helmholtz", 24}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& [name, n] : expected) {
    RunConfig c = default_run_config(name);
    const auto pde = make_pde(c);
    // Cheap snapshots: the ledger depends on the basis construction only.
    c.grid = pde->time_dependent() ? GridResolution{12, 10, 12, 8} : GridResolution{12, 12, 0, 8};
    c.layers = {2, 8, 8, 1};
    c.fom.lbfgs.epochs = 20;
    c.online.optim.epochs = 10;
    GreedyConfig g = greedy_config(c);
    bool every_step = true;
    g.on_step = [&](const MetaArtifact& a, const GreedyTrace&) {
      every_step = every_step && sparse_set(a.basis).size() == 2 * a.basis.size() - 1;
    };
    const auto grid = build_grid(*pde, c.grid);
    const auto r = offline_run(*pde, grid, training_set(c, *pde), g);
    const std::size_t m = sparse_set(r.artifact.basis).size();
    ok = ok && c.n_basis == n && r.artifact.basis.size() == n && m == 2 * n - 1 && every_step;
    d << name << " N=" << r.artifact.basis.size() << " |X^m|=" << m << (every_step ? "" : " (step mismatch)") << "; ";
  }
  return {ok, d.str()};
}

// ---- 2. GEIM/EIM against the brute-force oracle ---------------------------

constexpr std::size_t kLine = 201;

std::vector<VectorXd> line_family(const std::function<double(double, int)>& f, int first, int last) {
  std::vector<VectorXd> out;
  for (int k = first; k <= last; ++k) {
    VectorXd v(kLine);
    for (std::size_t i = 0; i < kLine; ++i) v[Eigen::Index(i)] = f(-1.0 + double(i) / 100.0, k);
    out.push_back(v);
  }
  return out;
}

Outcome interpolation() {
  double err = 0.0, inv = 0.0;
  bool points = true;
  const auto mono = line_family([](double x, int k) { return std::pow(x, k); }, 0, 4);
  const auto sines = line_family([](double x, int k) { return std::sin(k * std::numbers::pi * x); }, 1, 5);

  for (const auto* fam : {&mono, &sines}) {
    ReducedBasis b(kLine);
    for (const auto& r : *fam) geim_step(b, r, std::vector<double>{0.0});
    const auto ref = oracle::brute_force(*fam, [](std::size_t, const std::vector<std::size_t>& chosen) {
      std::vector<char> m(kLine, 1);
      for (std::size_t p : chosen) m[p] = 0;
      return m;
    });
    points = points && b.magic == ref.points;
    if (b.magic != ref.points) continue;
    err = std::max({err, (b.xi - ref.fields).lpNorm<Eigen::Infinity>(), (b.beta - ref.beta).lpNorm<Eigen::Infinity>()});
    for (std::size_t k = 0; k < fam->size(); ++k)
      err = std::max(err, (b.alphas[k] - ref.alphas[k]).lpNorm<Eigen::Infinity>());
    // xi_j is 1 at its own magic point and 0 at every earlier one.
    for (std::size_t j = 0; j < b.size(); ++j)
      for (std::size_t i = 0; i <= j; ++i)
        inv = std::max(inv, std::abs(b.xi(Eigen::Index(b.magic[i]), Eigen::Index(j)) - (i == j ? 1.0 : 0.0)));
  }

  // EIM on the sines with the monomial magic points taken.
  ReducedBasis mb(kLine);
  for (const auto& r : mono) geim_step(mb, r, std::vector<double>{0.0});
  std::vector<char> base(kLine, 1);
  for (std::size_t p : mb.magic) base[p] = 0;
  ReducedBasis e(kLine);
  e.magic = mb.magic;
  std::vector<VectorXd> alphas;
  for (const auto& r : sines) {
    std::vector<char> mask = base;
    for (std::size_t p : e.residual_points) mask[p] = 0;
    alphas.push_back(eim_step(e, r, mask).alpha);
  }
  const auto ref = oracle::brute_force(sines, [&](std::size_t, const std::vector<std::size_t>& chosen) {
    std::vector<char> m = base;
    for (std::size_t p : chosen) m[p] = 0;
    return m;
  });
  points = points && e.residual_points == ref.points;
  if (e.residual_points == ref.points) {
    err = std::max(err, (e.residuals - ref.fields).lpNorm<Eigen::Infinity>());
    for (std::size_t k = 0; k < sines.size(); ++k)
      err = std::max(err, (alphas[k] - ref.alphas[k]).lpNorm<Eigen::Infinity>());
    for (std::size_t j = 0; j < sines.size(); ++j)
      for (std::size_t i = 0; i <= j; ++i)
        inv = std::max(inv, std::abs(e.residuals(Eigen::Index(e.residual_points[i]), Eigen::Index(j)) -
                                     (i == j ? 1.0 : 0.0)));
  }
  return {points && err <= 1e-12 && inv <= 1e-10,
          std::string(points ? "points match" : "point mismatch") + ", max |lib - oracle| " + sci(err) +
              " (tol 1e-12), invariants " + sci(inv) + " (tol 1e-10)"};
}

// ---- 3. derivative fidelity -----------------------------------------------

double value_at(const MlpParams& p, double a, double b) {
  const Point pt{a, b};
  return forward_jet(p, std::span(&pt, 1), SlotSet{Slot::U}, InputLayout::SpaceTime)[Slot::U][0];
}

double richardson(const std::function<double(const VectorXd&)>& f, const VectorXd& c, Eigen::Index k) {
  const auto central = [&](double h) {
    VectorXd p = c, m = c;
    p[k] += h;
    m[k] -= h;
    return (f(p) - f(m)) / (2 * h);
  };
  return (4.0 * central(5e-4) - central(1e-3)) / 3.0;
}

struct RandomBasis {
  PdePtr pde;
  CollocationGrid grid;
  std::vector<Snapshot> snapshots;
  ReducedBasis basis;
};

RandomBasis random_basis(const std::string& name, std::size_t n, std::uint64_t seed) {
  RandomBasis f{make_pde(name), {}, {}, ReducedBasis()};
  f.grid = build_grid(*f.pde, f.pde->time_dependent() ? GridResolution{9, 7, 9, 6} : GridResolution{9, 9, 0, 6});
  f.basis = ReducedBasis(f.grid.size());
  Rng rng{static_cast<unsigned>(seed)};
  const int layers[] = {2, 6, 6, 1};
  for (std::size_t k = 0; k < n; ++k) {
    Snapshot s;
    for (const auto& r : f.pde->parameter_box()) s.mu.push_back(rng.uniform(r.lo, r.hi));
    s.params = init_params(layers, seed * 100 + k);
    for (auto& b : s.params.biases) b = rng.vector(b.size(), -0.5, 0.5);
    s.tables = snapshot_tables(s.params, f.grid, *f.pde);
    geim_step(f.basis, s.tables[Slot::U], s.mu);
    if (k > 0) eim_step(f.basis, residual_field(*f.pde, s.mu, f.grid, s.tables), residual_eligibility(f.basis, f.grid));
    f.snapshots.push_back(std::move(s));
  }
  return f;
}

Outcome derivatives() {
  Rng rng(11);
  const SlotSet st{Slot::U, Slot::Ut, Slot::Utt, Slot::Ux, Slot::Uxx};
  const SlotSet ss{Slot::U, Slot::Ux, Slot::Uxx, Slot::Uy, Slot::Uyy};
  double jet = 0.0;
  for (int net = 0; net < 10; ++net) {
    const int layers[] = {2, 12, 10, 8, 1};
    auto p = init_params(layers, 100 + std::uint64_t(net));
    for (auto& b : p.biases) b = rng.vector(b.size(), -0.5, 0.5);
    std::vector<Point> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    for (InputLayout layout : {InputLayout::SpaceTime, InputLayout::SpaceSpace}) {
      const bool time = layout == InputLayout::SpaceTime;
      const Jet j = forward_jet(p, pts, time ? st : ss, layout);
      const Slot d1 = time ? Slot::Ut : Slot::Uy, d2 = time ? Slot::Utt : Slot::Uyy;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [a, b] = pts[i];
        const auto fx = [&](double v) { return value_at(p, v, b); };
        const auto fy = [&](double v) { return value_at(p, a, v); };
        const auto k = Eigen::Index(i);
        jet = std::max({jet, rel_error(j[Slot::Ux][k], oracle::central_difference(fx, a, 1e-4)),
                        rel_error(j[Slot::Uxx][k], oracle::second_difference(fx, a, 1e-4)),
                        rel_error(j[d1][k], oracle::central_difference(fy, b, 1e-4)),
                        rel_error(j[d2][k], oracle::second_difference(fy, b, 1e-4))});
      }
    }
  }

  double pinn = 0.0;
  const std::vector<std::pair<std::string, std::vector<double>>> cases{
      {"klein_gordon", {-1.4, 0.3, 0.6}}, {"allen_cahn", {5e-4, 2.0}}, {"burgers", {0.2}}, {"helmholtz", {1.5, 2.5}}};
  for (const auto& [name, mu] : cases) {
    const auto pde = make_pde(name);
    const auto grid = build_grid(*pde, pde->time_dependent() ? GridResolution{6, 5, 7, 4} : GridResolution{6, 6, 0, 4});
    const int layers[] = {2, 8, 8, 1};
    auto params = init_params(layers, 17);
    for (auto& b : params.biases) b = rng.vector(b.size(), -0.2, 0.2);
    PinnLossOptions opt;
    opt.chunk = 16;
    const auto lg = pinn_loss_grad(params, *pde, grid, mu, opt);
    const VectorXd theta = params.flatten();
    const auto loss_at = [&](const VectorXd& t) {
      MlpParams q = params;
      q.assign(t);
      return pinn_loss(q, *pde, grid, mu, opt).total();
    };
    const double scale = lg.grad.lpNorm<Eigen::Infinity>();
    for (int trial = 0; trial < 20; ++trial) {
      const auto k = Eigen::Index(rng.index(std::size_t(theta.size())));
      VectorXd tp = theta, tm = theta;
      tp[k] += 1e-6;
      tm[k] -= 1e-6;
      pinn = std::max(pinn, rel_error(lg.grad[k], (loss_at(tp) - loss_at(tm)) / 2e-6, 1e-2 * scale));
    }
  }

  double meta = 0.0;
  std::uint64_t seed = 7;
  for (const auto& [name, _] : cases) {
    const auto f = random_basis(name, 4, seed++);
    const auto sparse = precompute_sparse_tables(f.basis, f.snapshots, f.grid, *f.pde);
    const auto gpt = gpt_tables(f.snapshots, 4, f.grid, *f.pde);
    std::vector<double> mu;
    for (const auto& r : f.pde->parameter_box()) mu.push_back(rng.uniform(r.lo, r.hi));
    const VectorXd c = rng.vector(4, -1.0, 1.0);
    const auto ls = s2gpt_loss_grad(c, sparse, *f.pde, mu);
    const auto lgp = gpt_loss_grad(c, gpt, *f.pde, mu);
    const auto fs = [&](const VectorXd& x) { return s2gpt_loss_grad(x, sparse, *f.pde, mu).loss; };
    const auto fg = [&](const VectorXd& x) { return gpt_loss_grad(x, gpt, *f.pde, mu).loss; };
    for (Eigen::Index k = 0; k < 4; ++k)
      meta = std::max({meta, rel_error(ls.grad[k], richardson(fs, c, k)), rel_error(lgp.grad[k], richardson(fg, c, k))});
  }
  return {jet <= 1e-6 && pinn <= 1e-5 && meta <= 1e-8, "jets " + sci(jet) + " (tol 1e-6), pinn_loss_grad " + sci(pinn) +
                                                           " (tol 1e-5), meta losses " + sci(meta) + " (tol 1e-8)"};
}

// ---- 4. Helmholtz FOM vs manufactured solution ----------------------------

Outcome helmholtz_fom() {
  const auto pde = make_pde("helmholtz");
  const auto grid = build_grid(*pde, {40, 40, 0, 40});
  const std::vector<double> mu{1.95, 3.95};
  NetConfig net;
  net.layers = {2, 20, 20, 20, 20, 1};
  net.seed = 1;
  FomConfig cfg;
  cfg.lbfgs.epochs = 4000;
  cfg.weights.boundary = 100.0;
  cfg.chunk = 64;
  const Snapshot s = train_full_pinn(*pde, mu, grid, net, cfg);
  const auto held = tensor_points(pde->domain(), 101, 101);
  const Jet j = forward_jet(s.params, held, SlotSet{Slot::U}, InputLayout::SpaceSpace);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const double e = pde->exact_solution(held[i], mu);
    num += std::pow(j[Slot::U][Eigen::Index(i)] - e, 2);
    den += e * e;
  }
  const double rel = std::sqrt(num / den);
  return {rel <= 5e-2, "rel L2 on 101x101 " + sci(rel) + " (tol 5e-2), " + std::to_string(s.epochs) + " epochs, " +
                           fmt("%.0f s", s.seconds)};
}

// ---- 5-9. desk Burgers run ------------------------------------------------

RunConfig desk_burgers() {
  RunConfig c = default_run_config("burgers");
  c.parameter_box = {{"nu", 0.1, 1.0}};
  c.grid = {40, 40, 40, 20};
  c.train_counts = {30};
  c.n_basis = 8;
  c.seed = 1;
  c.fom.lbfgs.epochs = 500;
  c.test.count = 20;
  c.threads = 1;
  return c;
}

struct Desk {
  RunConfig config;
  PdePtr pde;
  CollocationGrid grid;
  OfflineResult run;
  std::unique_ptr<OnlineModel> model;
};

Desk& desk() {
  static std::unique_ptr<Desk> d;
  if (!d) {
    d = std::make_unique<Desk>();
    d->config = desk_burgers();
    d->pde = make_pde(d->config);
    d->grid = build_grid(*d->pde, d->config.grid);
    const auto t0 = std::chrono::steady_clock::now();
    d->run = offline_run(*d->pde, d->grid, training_set(d->config, *d->pde), greedy_config(d->config));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("  desk Burgers offline run: %zu snapshots in %.0f s\n", d->run.artifact.snapshots.size(), secs);
    d->model = std::make_unique<OnlineModel>(d->run.artifact, d->config.online, d->config.fom.weights, true);
  }
  return *d;
}

double rel_l2(const VectorXd& a, const VectorXd& b) { return (a - b).norm() / b.norm(); }

Outcome span_recovery() {
  auto& d = desk();
  double worst = 0.0;
  std::ostringstream per;
  for (const auto& s : d.run.artifact.snapshots) {
    const auto sol = d.model->solve(s.mu);
    const double e = rel_l2(d.model->field(sol.c), s.tables[Slot::U]);
    worst = std::max(worst, e);
    per << " " << sci(e);
  }
  return {worst <= 1e-3, "worst rel L2 " + sci(worst) + " (tol 1e-3); per snapshot:" + per.str()};
}

Outcome greedy_decay() {
  const auto& sweeps = desk().run.trace.sweeps;
  std::ostringstream seq;
  bool monotone = true;
  for (std::size_t i = 0; i < sweeps.size(); ++i) {
    seq << (i ? "," : "") << sci(sweeps[i].worst());
    if (i > 0 && sweeps[i].worst() > 1.2 * sweeps[i - 1].worst()) monotone = false;
  }
  const bool sized = sweeps.size() == 8;
  const double first = sweeps.front().worst(), last = sweeps.back().worst();
  const bool decayed = sized && last <= first / 10.0;
  return {decayed && monotone, "worst delta n=1..8: " + seq.str() + (monotone ? "" : " (not monotone within 1.2)") +
                                   "; ratio n=8/n=1 " + sci(last / first) + " (tol 1e-1)"};
}

Outcome sparse_full() {
  auto& d = desk();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const auto test = test_set(d.config, *d.pde);
  for (const auto& mu : test) {
    const auto sol = d.model->solve(mu);
    const double ratio = d.model->full_grid_loss(sol.c, mu) / sol.loss;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {test.size() == 20 && lo >= 0.1 && hi <= 10.0,
          std::to_string(test.size()) + " held-out: full/sparse loss ratio in [" + sci(lo) + ", " + sci(hi) +
              "] (tol [0.1, 10])"};
}

Outcome speed() {
  auto& d = desk();
  const auto test = test_set(d.config, *d.pde);
  double s2 = 0.0, gpt = 0.0;
  for (const auto& mu : test) {
    s2 += d.model->solve(mu).seconds;
    gpt += d.model->solve_gpt(mu).seconds;
  }
  s2 /= double(test.size());
  gpt /= double(test.size());
  double fom = 0.0;
  for (const auto& s : d.run.artifact.snapshots) fom += s.seconds;
  fom /= double(d.run.artifact.snapshots.size());
  return {s2 <= 0.5 * gpt && s2 <= 1e-2 * fom, "per query s2gpt " + sci(s2) + " s, gpt " + sci(gpt) + " s (ratio " +
                                                    sci(s2 / gpt) + ", tol 0.5), vs mean FOM " + sci(fom) + " s (ratio " +
                                                    sci(s2 / fom) + ", tol 1e-2)"};
}

// Same snapshot networks, basis rebuilt in the same order on a grid of
// twice the resolution.
ReducedBasis rebuild(const std::vector<Snapshot>& nets, const PdeSpec& pde, const CollocationGrid& grid,
                     std::vector<Snapshot>& out) {
  ReducedBasis b(grid.size());
  for (const auto& s : nets) {
    Snapshot t = s;
    t.tables = snapshot_tables(t.params, grid, pde);
    geim_step(b, t.tables[Slot::U], t.mu);
    if (b.size() > 1) eim_step(b, residual_field(pde, t.mu, grid, t.tables), residual_eligibility(b, grid));
    out.push_back(std::move(t));
  }
  return b;
}

double per_epoch(const BasisTables& t, const PdeSpec& pde, const VectorXd& c0) {
  OnlineConfig gd;
  gd.method = OnlineMethod::GradientDescent;
  gd.optim.learning_rate = 1e-8;
  gd.optim.epochs = 5000;
  gd.optim.grad_tol = 0.0;
  gd.optim.loss_change_tol = 0.0;
  const std::vector<double> mu{0.55};
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 7; ++rep) {
    const auto sol = train_online(t, pde, mu, c0, gd);
    best = std::min(best, sol.seconds / double(sol.epochs));
  }
  return best;
}

Outcome scale_independence() {
  auto& d = desk();
  const auto& a = d.run.artifact;
  const auto fine_res = GridResolution{80, 80, 80, 40};
  const auto fine = build_grid(*d.pde, fine_res);
  std::vector<Snapshot> fine_snaps;
  const ReducedBasis fb = rebuild(a.snapshots, *d.pde, fine, fine_snaps);
  const auto coarse_t = precompute_sparse_tables(a.basis, a.snapshots, d.grid, *d.pde);
  const auto fine_t = precompute_sparse_tables(fb, fine_snaps, fine, *d.pde);
  const std::size_t n = a.basis.size();
  const double tc = per_epoch(coarse_t, *d.pde, initial_guess(a.basis, n));
  const double tf = per_epoch(fine_t, *d.pde, initial_guess(fb, n));
  const double change = std::abs(tf / tc - 1.0);
  return {change < 0.1, "per epoch " + sci(tc) + " s on " + std::to_string(d.grid.size()) + " points, " + sci(tf) +
                            " s on " + std::to_string(fine.size()) + " (change " + fmt("%.1f%%", 100 * change) +
                            ", tol 10%); sparse rows " + std::to_string(coarse_t.rows()) + " vs " +
                            std::to_string(fine_t.rows())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"sparsity ledger", sparsity_ledger},   {"GEIM/EIM vs oracle", interpolation},
      {"derivative fidelity", derivatives},   {"Helmholtz FOM accuracy", helmholtz_fom},
      {"span recovery", span_recovery},       {"greedy decay", greedy_decay},
      {"sparse/full corroboration", sparse_full}, {"online speed", speed},
      {"scale independence", scale_independence}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed ? 1 : 0;
}
