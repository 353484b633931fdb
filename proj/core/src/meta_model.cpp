#include "s2gpt/meta_model.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "s2gpt/errors.hpp"

namespace s2gpt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const MatrixXd& BasisTables::operator[](Slot s) const {
  if (!present.contains(s)) throw std::out_of_range("basis tables lack slot " + std::string(slot_name(s)));
  return values[index(s)];
}

Jet BasisTables::combine(const VectorXd& c) const {
  if (std::size_t(c.size()) != width())
    throw std::invalid_argument("coefficient vector has " + std::to_string(c.size()) +
                                " entries, tables have width " + std::to_string(width()));
  Jet j = Jet::zeros(present, rows());
  for (Slot s : present.list()) j[s].noalias() = values[index(s)] * c;
  return j;
}

BasisTables raw_tables(std::span<const Snapshot> snapshots, std::size_t width,
                       const CollocationGrid& grid, const std::vector<std::size_t>& indices,
                       SlotSet slots) {
  if (width > snapshots.size()) throw std::invalid_argument("not enough snapshots for requested width");
  BasisTables t;
  t.indices = indices;
  t.points = grid.gather(indices);
  t.present = slots | SlotSet{Slot::U};
  const auto rows = Eigen::Index(indices.size());
  for (Slot s : t.present.list()) {
    MatrixXd& m = t.values[index(s)];
    m.resize(rows, Eigen::Index(width));
    for (std::size_t i = 0; i < width; ++i) {
      const VectorXd& column = snapshots[i].tables[s];
      if (std::size_t(column.size()) != grid.size())
        throw std::invalid_argument("snapshot tables do not match the grid");
      for (Eigen::Index p = 0; p < rows; ++p) m(p, Eigen::Index(i)) = column[Eigen::Index(indices[std::size_t(p)])];
    }
  }
  t.row_sums = VectorXd::Ones(Eigen::Index(width));
  return t;
}

BasisTables basis_tables(const ReducedBasis& basis, std::span<const Snapshot> snapshots,
                         const CollocationGrid& grid, const std::vector<std::size_t>& indices,
                         SlotSet slots) {
  BasisTables t = raw_tables(snapshots, basis.size(), grid, indices, slots);
  for (Slot s : t.present.list()) t.values[index(s)] = t.values[index(s)] * basis.beta.transpose();
  t.row_sums = basis.beta_sums();
  return t;
}

BasisTables precompute_sparse_tables(const ReducedBasis& basis, std::span<const Snapshot> snapshots,
                                     const CollocationGrid& grid, const PdeSpec& pde) {
  return basis_tables(basis, snapshots, grid, sparse_set(basis), pde.residual_slots());
}

ReducedBasis truncated(const ReducedBasis& basis, std::size_t n) {
  if (n > basis.size()) throw std::invalid_argument("cannot truncate a basis to a larger size");
  ReducedBasis t(basis.grid_size);
  const auto k = Eigen::Index(n);
  const auto r = Eigen::Index(std::min(basis.residual_points.size(), n ? n - 1 : 0));
  t.xi = basis.xi.leftCols(k);
  t.beta = basis.beta.topLeftCorner(k, k);
  t.magic.assign(basis.magic.begin(), basis.magic.begin() + k);
  t.residual_points.assign(basis.residual_points.begin(), basis.residual_points.begin() + r);
  t.residuals = basis.residuals.leftCols(r);
  t.alphas.assign(basis.alphas.begin(), basis.alphas.begin() + k);
  t.mu.assign(basis.mu.begin(), basis.mu.begin() + k);
  return t;
}

MetaLoss s2gpt_loss_grad(const VectorXd& c, const BasisTables& tables, const PdeSpec& pde,
                         std::span<const double> mu, const S2gptLossOptions& options) {
  pde.check_parameters(mu);
  const Jet field = tables.combine(c);
  const std::size_t m = tables.rows();
  MetaLoss out;
  out.grad = VectorXd::Zero(c.size());
  if (m > 0) {
    const SlotSet used = pde.residual_slots();
    Jet weight = Jet::zeros(tables.present, m);
    double sum = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const SlotVector s = field.at(p);
      const double r = pde.residual(s, mu, tables.points[p]);
      const SlotVector d = pde.residual_partials(s, mu, tables.points[p]);
      sum += r * r;
      for (Slot sl : used.list()) weight[sl][Eigen::Index(p)] = 2.0 * r * d[index(sl)] / double(m);
    }
    out.residual = sum / double(m);
    for (Slot sl : used.list()) out.grad.noalias() += tables[sl].transpose() * weight[sl];
  }
  if (pde.time_dependent()) {
    double w = 1.0;
    if (pde.inhomogeneous_boundary()) w += options.boundary_row_sum;
    const double d = c.dot(tables.row_sums) - 1.0;
    out.initial = w * d * d;
    out.grad += 2.0 * w * d * tables.row_sums;
  }
  out.loss = out.residual + out.initial;
  return out;
}

VectorXd initial_guess(const ReducedBasis& basis, std::size_t n) {
  if (n == 0 || n > basis.alphas.size())
    throw std::invalid_argument("initial guess needs 1 <= n <= recorded steps");
  VectorXd c0 = VectorXd::Zero(Eigen::Index(n));
  c0.head(Eigen::Index(n - 1)) = basis.alphas[n - 1];
  return c0;
}

MetaSolution train_reduced(const MetaOracle& loss, const VectorXd& c0, const OnlineConfig& config) {
  const Oracle oracle = [&](const VectorXd& c, VectorXd& grad) {
    MetaLoss l = loss(c);
    grad = std::move(l.grad);
    return l.loss;
  };
  const auto start = std::chrono::steady_clock::now();
  OptimResult r;
  switch (config.method) {
    case OnlineMethod::GradientDescent: r = gd_run(oracle, c0, config.optim); break;
    case OnlineMethod::Adam: r = adam_run(oracle, c0, config.optim); break;
    case OnlineMethod::Lbfgs: r = lbfgs_run(oracle, c0, config.optim); break;
  }
  const auto stop = std::chrono::steady_clock::now();
  MetaSolution s;
  s.c = std::move(r.x);
  s.loss = r.loss;
  s.history = std::move(r.history);
  s.seconds = std::chrono::duration<double>(stop - start).count();
  s.epochs = r.epochs_run;
  s.status = r.status;
  s.diverged = r.status == OptimStatus::Diverged;
  return s;
}

MetaSolution train_online(const BasisTables& tables, const PdeSpec& pde, std::span<const double> mu,
                          const VectorXd& c0, const OnlineConfig& config) {
  pde.check_parameters(mu);
  return train_reduced([&](const VectorXd& c) { return s2gpt_loss_grad(c, tables, pde, mu, config.loss); },
                       c0, config);
}

GptTables gpt_tables(std::span<const Snapshot> snapshots, std::size_t width,
                     const CollocationGrid& grid, const PdeSpec& pde) {
  return {raw_tables(snapshots, width, grid, grid.interior, pde.residual_slots()),
          raw_tables(snapshots, width, grid, grid.initial, initial_slots(pde)),
          raw_tables(snapshots, width, grid, grid.boundary, boundary_slots(pde))};
}

namespace {

void pull_back(const BasisTables& t, const Jet& adjoint, VectorXd& grad) {
  for (Slot s : t.present.list()) grad.noalias() += t.values[index(s)].transpose() * adjoint[s];
}

}  // namespace

MetaLoss gpt_loss_grad(const VectorXd& c, const GptTables& tables, const PdeSpec& pde,
                       std::span<const double> mu, const LossWeights& weights) {
  pde.check_parameters(mu);
  MetaLoss out;
  out.grad = VectorXd::Zero(c.size());
  double boundary = 0.0;
  if (const auto n = tables.interior.rows()) {
    const Jet j = tables.interior.combine(c);
    Jet adj = Jet::zeros(j.present, n);
    out.residual = interior_term(pde, mu, tables.interior.points, j, weights.residual / double(n), &adj);
    pull_back(tables.interior, adj, out.grad);
  }
  if (const auto n = tables.initial.rows()) {
    const Jet j = tables.initial.combine(c);
    Jet adj = Jet::zeros(j.present, n);
    out.initial = initial_term(pde, tables.initial.points, j, weights.initial / double(n), &adj);
    pull_back(tables.initial, adj, out.grad);
  }
  if (const auto n = tables.boundary.rows()) {
    const Jet j = tables.boundary.combine(c);
    Jet adj = Jet::zeros(j.present, n);
    boundary = boundary_term(pde, tables.boundary.points, j,
                             weights.boundary / double(boundary_records(pde, n)), &adj);
    pull_back(tables.boundary, adj, out.grad);
  }
  out.loss = out.residual + out.initial + boundary;
  return out;
}

MetaSolution train_gpt(const GptTables& tables, const PdeSpec& pde, std::span<const double> mu,
                       const VectorXd& c0, const OnlineConfig& config, const LossWeights& weights) {
  pde.check_parameters(mu);
  return train_reduced([&](const VectorXd& c) { return gpt_loss_grad(c, tables, pde, mu, weights); }, c0,
                       config);
}

VectorXd reconstruct(const VectorXd& c, const ReducedBasis& basis) {
  if (std::size_t(c.size()) != basis.size()) throw std::invalid_argument("coefficient count mismatch");
  return basis.xi * c;
}

VectorXd reconstruct_raw(const VectorXd& c, std::span<const Snapshot> snapshots) {
  if (std::size_t(c.size()) > snapshots.size()) throw std::invalid_argument("coefficient count mismatch");
  if (c.size() == 0) throw std::invalid_argument("empty coefficient vector");
  VectorXd u = c[0] * snapshots[0].tables[Slot::U];
  for (Eigen::Index i = 1; i < c.size(); ++i) u += c[i] * snapshots[std::size_t(i)].tables[Slot::U];
  return u;
}

}  // namespace s2gpt
