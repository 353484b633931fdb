#include "s2gpt/report.hpp"

#include <cmath>
#include <ostream>

#include "json.hpp"
#include "s2gpt/parallel.hpp"
#include "text.hpp"

namespace s2gpt {

namespace fs = std::filesystem;
using detail::CsvWriter;
using detail::num;
using nlohmann::json;

namespace {

std::vector<std::string> mu_cells(std::span<const double> mu) {
  std::vector<std::string> out;
  for (double v : mu) out.push_back(num(v));
  return out;
}

std::vector<std::string> mu_names(const PdeSpec& pde) {
  std::vector<std::string> out;
  for (const auto& r : pde.parameter_box()) out.push_back(r.name);
  return out;
}

std::vector<std::string> coord_names(const PdeSpec& pde) {
  return pde.time_dependent() ? std::vector<std::string>{"x", "t"} : std::vector<std::string>{"x", "y"};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

std::string mu_text(std::span<const double> mu) {
  std::string s = "(";
  for (std::size_t i = 0; i < mu.size(); ++i) s += (i ? ", " : "") + num(mu[i]);
  return s + ")";
}

void write_field(const fs::path& path, const CollocationGrid& grid, const PdeSpec& pde,
                 const std::vector<std::pair<std::string, const Eigen::VectorXd*>>& columns) {
  std::vector<std::string> header = coord_names(pde);
  for (const auto& [name, v] : columns) header.push_back(name);
  CsvWriter w(path, header);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    std::vector<std::string> row{num(grid.points[p][0]), num(grid.points[p][1])};
    for (const auto& [name, v] : columns) row.push_back(num((*v)[static_cast<Eigen::Index>(p)]));
    w.row(row);
  }
}

// Copy of a config's FOM settings as a one-shot training config.
NetConfig net_config(const RunConfig& c) { return {c.layers, c.network_seed}; }

}  // namespace

OnlineModel::OnlineModel(const MetaArtifact& artifact, OnlineConfig online, LossWeights weights, bool baseline)
    : artifact_(&artifact),
      pde_(make_pde(artifact.pde, artifact.pde_options)),
      grid_(artifact_grid(*pde_, artifact)),
      online_(online),
      weights_(weights) {
  const auto& basis = artifact.basis;
  sparse_ = precompute_sparse_tables(basis, artifact.snapshots, grid_, *pde_);
  full_ = basis_tables(basis, artifact.snapshots, grid_, grid_.interior, pde_->residual_slots());
  if (baseline) gpt_ = gpt_tables(artifact.snapshots, basis.size(), grid_, *pde_);
  c0_ = initial_guess(basis, basis.size());
}

MetaSolution OnlineModel::solve(std::span<const double> mu) const {
  pde_->check_parameters(mu);
  return train_online(sparse_, *pde_, mu, c0_, online_);
}

MetaSolution OnlineModel::solve_gpt(std::span<const double> mu) const {
  if (!gpt_) throw std::logic_error("baseline tables were not built");
  pde_->check_parameters(mu);
  // Start from the same combination expressed in raw snapshot coordinates.
  const Eigen::VectorXd c0 = artifact_->basis.beta.transpose() * c0_;
  return train_gpt(*gpt_, *pde_, mu, c0, online_, weights_);
}

Eigen::VectorXd OnlineModel::field(const Eigen::VectorXd& c) const { return reconstruct(c, artifact_->basis); }

Eigen::VectorXd OnlineModel::gpt_field(const Eigen::VectorXd& c) const {
  return reconstruct_raw(c, artifact_->snapshots);
}

double OnlineModel::full_grid_loss(const Eigen::VectorXd& c, std::span<const double> mu) const {
  return s2gpt_loss_grad(c, full_, *pde_, mu, online_.loss).loss;
}

std::optional<Eigen::VectorXd> OnlineModel::exact_field(std::span<const double> mu) const {
  if (!pde_->has_exact_solution()) return std::nullopt;
  Eigen::VectorXd u(static_cast<Eigen::Index>(grid_.size()));
  for (std::size_t p = 0; p < grid_.size(); ++p) u[static_cast<Eigen::Index>(p)] = pde_->exact_solution(grid_.points[p], mu);
  return u;
}

OfflineResult run_offline(const RunConfig& config, std::ostream* log) {
  const PdePtr pde = make_pde(config);
  const CollocationGrid grid = build_grid(*pde, config.grid);
  const auto train = training_set(config, *pde);
  GreedyConfig g = greedy_config(config);
  g.threads = env_thread_cap(config.threads);
  if (log)
    *log << "offline: " << pde->name() << ", " << grid.size() << " grid points, " << train.size()
         << " training parameters, N = " << config.n_basis << "\n";
  g.on_step = [&](const MetaArtifact& art, const GreedyTrace& trace) {
    const GreedyStep& s = trace.steps.back();
    if (log)
      *log << "  n=" << s.n << " mu=" << mu_text(s.mu) << " fom_loss=" << num(s.fom_loss)
           << " fom_s=" << num(s.fom_seconds)
           << (std::isnan(s.worst_delta) ? std::string() : " worst_delta=" + num(s.worst_delta)) << "\n";
    if (config.checkpoint) {
      MetaArtifact copy = art;
      copy.pde_options = config.pde_options;
      save_store(config.output_dir, config, copy, trace);
    }
  };
  OfflineResult r = offline_run(*pde, grid, train, g);
  r.artifact.pde_options = config.pde_options;
  save_store(config.output_dir, config, r.artifact, r.trace);
  if (log) *log << "store written to " << config.output_dir << "\n";
  return r;
}

std::vector<OnlineRow> run_online(const fs::path& store, const std::vector<std::vector<double>>& mus,
                                  bool baseline, const fs::path& out_dir, std::ostream* log) {
  const StoredRun run = load_store(store);
  const OnlineModel model(run.artifact, run.config.online, run.config.fom.weights, baseline);
  const PdeSpec& pde = model.pde();
  for (const auto& mu : mus) pde.check_parameters(mu);
  fs::create_directories(out_dir);

  std::vector<OnlineRow> rows;
  CsvWriter w(out_dir / "online.csv",
              std::vector<std::string>{"query"} + mu_names(pde) +
                  std::vector<std::string>{"delta", "epochs", "status", "seconds", "snapshot_rel_l2", "exact_rel_l2",
                                           "gpt_loss", "gpt_epochs", "gpt_seconds", "gpt_exact_rel_l2",
                                           "time_ratio"});
  for (std::size_t q = 0; q < mus.size(); ++q) {
    OnlineRow row;
    row.mu = mus[q];
    row.s2gpt = model.solve(row.mu);
    const Eigen::VectorXd u = model.field(row.s2gpt.c);
    for (const auto& snap : run.artifact.snapshots)
      if (snap.mu == row.mu) row.vs_snapshot = compute_error_metrics(u, snap.tables[Slot::U]);
    const auto exact = model.exact_field(row.mu);
    if (exact) row.vs_exact = compute_error_metrics(u, *exact);
    std::vector<std::pair<std::string, const Eigen::VectorXd*>> cols{{"s2gpt", &u}};
    Eigen::VectorXd gu;
    if (baseline) {
      row.gpt = model.solve_gpt(row.mu);
      gu = model.gpt_field(row.gpt->c);
      if (exact) row.gpt_vs_exact = compute_error_metrics(gu, *exact);
      cols.push_back({"gpt", &gu});
    }
    if (exact) cols.push_back({"exact", &*exact});
    write_field(out_dir / ("field_" + std::to_string(q) + ".csv"), model.grid(), pde, cols);

    const auto rel = [](const std::optional<ErrorMetrics>& m) {
      return m ? opt_num(m->rel_l2) : std::string();
    };
    w.row(std::vector<std::string>{num(q)} + mu_cells(row.mu) +
          std::vector<std::string>{
              num(row.s2gpt.loss), num(row.s2gpt.epochs), std::string(status_name(row.s2gpt.status)),
              num(row.s2gpt.seconds), rel(row.vs_snapshot), rel(row.vs_exact),
              row.gpt ? num(row.gpt->loss) : "", row.gpt ? num(row.gpt->epochs) : "",
              row.gpt ? num(row.gpt->seconds) : "", rel(row.gpt_vs_exact),
              row.gpt && row.gpt->seconds > 0 ? num(row.s2gpt.seconds / row.gpt->seconds) : ""});
    if (log)
      *log << "  mu=" << mu_text(row.mu) << " delta=" << num(row.s2gpt.loss) << " s=" << num(row.s2gpt.seconds)
           << (row.gpt ? " gpt_s=" + num(row.gpt->seconds) : std::string()) << "\n";
    rows.push_back(std::move(row));
  }
  return rows;
}

BenchmarkSummary run_benchmark(const RunConfig& config, std::ostream* log) {
  BenchmarkSummary out;
  out.offline = run_offline(config, log);
  const MetaArtifact& art = out.offline.artifact;
  const GreedyTrace& trace = out.offline.trace;
  const PdePtr pde = make_pde(config);
  const CollocationGrid grid = artifact_grid(*pde, art);
  const fs::path dir = fs::path(config.output_dir) / "report";
  fs::create_directories(dir);
  const auto names = mu_names(*pde);

  // Worst training loss per width, on X^m and on the full interior at the
  // same coefficients.
  {
    CsvWriter w(dir / "loss_decay.csv",
                {"n", "worst_sparse", "mean_sparse", "worst_full", "mean_full", "diverged"});
    for (const SweepRecord& s : trace.sweeps) {
      const ReducedBasis b = truncated(art.basis, s.width);
      const BasisTables sparse = precompute_sparse_tables(b, art.snapshots, grid, *pde);
      const BasisTables full = basis_tables(b, art.snapshots, grid, grid.interior, pde->residual_slots());
      const Eigen::VectorXd c0 = initial_guess(art.basis, s.width);
      double worst_s = 0, mean_s = 0, worst_f = 0, mean_f = 0;
      std::size_t diverged = 0;
      for (const auto& mu : art.train) {
        const MetaSolution sol = train_online(sparse, *pde, mu, c0, config.online);
        const double f = s2gpt_loss_grad(sol.c, full, *pde, mu, config.online.loss).loss;
        worst_s = std::max(worst_s, sol.loss);
        worst_f = std::max(worst_f, f);
        mean_s += sol.loss / static_cast<double>(art.train.size());
        mean_f += f / static_cast<double>(art.train.size());
        diverged += sol.diverged;
      }
      w.row({num(s.width), num(worst_s), num(mean_s), num(worst_f), num(mean_f), num(diverged)});
    }
  }
  {
    CsvWriter w(dir / "selected.csv", std::vector<std::string>{"n", "train_index"} + names +
                                          std::vector<std::string>{"worst_delta", "fom_loss", "fom_seconds"});
    for (const GreedyStep& s : trace.steps)
      w.row(std::vector<std::string>{num(s.n), num(s.train_index)} + mu_cells(s.mu) +
            std::vector<std::string>{std::isnan(s.worst_delta) ? "" : num(s.worst_delta), num(s.fom_loss),
                                     num(s.fom_seconds)});
  }
  {
    CsvWriter w(dir / "sparse_points.csv",
                std::vector<std::string>{"order", "kind", "grid_index"} + coord_names(*pde));
    std::size_t order = 0;
    for (std::size_t i : sparse_set(art.basis)) {
      const bool magic = order < art.basis.magic.size();
      w.row({num(order++), magic ? "magic" : "residual", num(i), num(grid.points[i][0]), num(grid.points[i][1])});
    }
  }

  // Held-out sweep, one query at a time so the timings are single-threaded.
  const OnlineModel model(art, config.online, config.fom.weights, config.baseline);
  out.test = test_set(config, *pde);
  double fom_total = 0;
  for (const auto& s : art.snapshots) fom_total += s.seconds;
  out.fom_seconds_mean = art.snapshots.empty() ? 0.0 : fom_total / static_cast<double>(art.snapshots.size());
  if (log) *log << "test sweep over " << out.test.size() << " held-out parameters\n";

  const auto reference = [&](const std::vector<double>& mu, std::size_t k,
                             std::string& kind) -> std::optional<Eigen::VectorXd> {
    if (auto e = model.exact_field(mu)) {
      kind = "exact";
      return e;
    }
    if (k < config.test.fom_reference) {
      kind = "fom";
      return train_full_pinn(*pde, mu, grid, net_config(config), config.fom).tables[Slot::U];
    }
    kind = "none";
    return std::nullopt;
  };

  {
    CsvWriter errs(dir / "errors.csv",
                   std::vector<std::string>{"query"} + names +
                       std::vector<std::string>{"reference", "s2gpt_delta", "s2gpt_full_loss", "s2gpt_rel_l2",
                                                "s2gpt_max_abs", "gpt_loss", "gpt_rel_l2", "gpt_max_abs"});
    CsvWriter times(dir / "online_times.csv", {"query", "s2gpt_seconds", "s2gpt_cumulative", "gpt_seconds",
                                               "gpt_cumulative", "s2gpt_epochs", "gpt_epochs"});
    double cum_s = 0, cum_g = 0;
    for (std::size_t k = 0; k < out.test.size(); ++k) {
      const auto& mu = out.test[k];
      const MetaSolution s = model.solve(mu);
      std::optional<MetaSolution> g;
      if (model.has_baseline()) g = model.solve_gpt(mu);
      cum_s += s.seconds;
      out.s2gpt_seconds.push_back(s.seconds);
      if (g) {
        cum_g += g->seconds;
        out.gpt_seconds.push_back(g->seconds);
      }
      std::string kind;
      const auto ref = reference(mu, k, kind);
      std::optional<ErrorMetrics> es, eg;
      if (ref) {
        es = compute_error_metrics(model.field(s.c), *ref);
        if (g) eg = compute_error_metrics(model.gpt_field(g->c), *ref);
      }
      errs.row(std::vector<std::string>{num(k)} + mu_cells(mu) +
               std::vector<std::string>{kind, num(s.loss), num(model.full_grid_loss(s.c, mu)),
                                        es ? num(es->rel_l2) : "", es ? num(es->max_abs) : "",
                                        g ? num(g->loss) : "", eg ? num(eg->rel_l2) : "",
                                        eg ? num(eg->max_abs) : ""});
      times.row({num(k), num(s.seconds), num(cum_s), g ? num(g->seconds) : "", g ? num(cum_g) : "",
                 num(s.epochs), g ? num(g->epochs) : ""});
    }
  }

  // Full fields at the figure parameters.
  for (std::size_t f = 0; f < config.test.figure_mu.size(); ++f) {
    const auto& mu = config.test.figure_mu[f];
    const MetaSolution s = model.solve(mu);
    const Eigen::VectorXd u = model.field(s.c);
    std::vector<std::pair<std::string, const Eigen::VectorXd*>> cols{{"s2gpt", &u}};
    Eigen::VectorXd gu, ref, es, eg;
    if (model.has_baseline()) {
      gu = model.gpt_field(model.solve_gpt(mu).c);
      cols.push_back({"gpt", &gu});
    }
    std::string kind;
    if (auto r = reference(mu, 0, kind)) {
      ref = std::move(*r);
      es = (u - ref).cwiseAbs();
      cols.push_back({kind, &ref});
      cols.push_back({"s2gpt_abs_error", &es});
      if (model.has_baseline()) {
        eg = (gu - ref).cwiseAbs();
        cols.push_back({"gpt_abs_error", &eg});
      }
      if (log)
        *log << "  figure mu=" << mu_text(mu) << " rel_l2 vs " << kind << " "
             << num(compute_error_metrics(u, ref).rel_l2) << "\n";
    }
    write_field(dir / ("field_" + std::to_string(f) + ".csv"), grid, *pde, cols);
  }

  double mean_s = 0, mean_g = 0;
  for (double v : out.s2gpt_seconds) mean_s += v / static_cast<double>(out.s2gpt_seconds.size());
  for (double v : out.gpt_seconds) mean_g += v / static_cast<double>(out.gpt_seconds.size());
  const json summary = {{"pde", config.pde},
                        {"n_basis", art.basis.size()},
                        {"sparse_points", sparse_set(art.basis).size()},
                        {"grid_points", grid.size()},
                        {"test_queries", out.test.size()},
                        {"s2gpt_seconds_mean", mean_s},
                        {"gpt_seconds_mean", model.has_baseline() ? json(mean_g) : json(nullptr)},
                        {"fom_seconds_mean", out.fom_seconds_mean},
                        {"figure_fields", config.test.figure_mu.size()}};
  detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (log) *log << "report written to " << dir.string() << "\n";
  return out;
}

Snapshot run_fom(const RunConfig& config, const std::vector<double>& mu, const fs::path& out_dir, std::ostream* log) {
  const PdePtr pde = make_pde(config);
  pde->check_parameters(mu);
  const CollocationGrid grid = build_grid(*pde, config.grid);
  if (log) *log << "fom: " << pde->name() << " at mu=" << mu_text(mu) << ", " << grid.size() << " points\n";
  Snapshot s = train_full_pinn(*pde, mu, grid, net_config(config), config.fom);
  fs::create_directories(out_dir);
  save_snapshot(out_dir / "fom.json", s);
  const Eigen::VectorXd& u = s.tables[Slot::U];
  std::vector<std::pair<std::string, const Eigen::VectorXd*>> cols{{"u", &u}};
  Eigen::VectorXd exact, err;
  if (pde->has_exact_solution()) {
    exact.resize(u.size());
    for (std::size_t p = 0; p < grid.size(); ++p)
      exact[static_cast<Eigen::Index>(p)] = pde->exact_solution(grid.points[p], mu);
    err = (u - exact).cwiseAbs();
    cols.push_back({"exact", &exact});
    cols.push_back({"abs_error", &err});
  }
  write_field(out_dir / "fom_field.csv", grid, *pde, cols);
  if (log) {
    *log << "  loss=" << num(s.loss) << " epochs=" << s.epochs << " status=" << status_name(s.status)
         << " seconds=" << num(s.seconds);
    if (exact.size()) *log << " rel_l2=" << num(compute_error_metrics(u, exact).rel_l2);
    *log << "\n";
  }
  return s;
}

}  // namespace s2gpt
