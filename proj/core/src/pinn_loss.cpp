#include "s2gpt/pinn_loss.hpp"

#include <stdexcept>

#include "s2gpt/errors.hpp"
#include "s2gpt/parallel.hpp"

namespace s2gpt {

double interior_term(const PdeSpec& pde, std::span<const double> mu, std::span<const Point> points,
                     const Jet& jet, double scale, Jet* adjoint) {
  const auto slots = pde.residual_slots().list();
  double sum = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const SlotVector s = jet.at(p);
    const double r = pde.residual(s, mu, points[p]);
    sum += r * r;
    if (adjoint) {
      const SlotVector d = pde.residual_partials(s, mu, points[p]);
      for (Slot sl : slots)
        (*adjoint)[sl][static_cast<Eigen::Index>(p)] += 2.0 * scale * r * d[index(sl)];
    }
  }
  return scale * sum;
}

double initial_term(const PdeSpec& pde, std::span<const Point> points, const Jet& jet, double scale,
                    Jet* adjoint) {
  double sum = 0.0;
  const auto& u = jet[Slot::U];
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto i = static_cast<Eigen::Index>(p);
    const double x = points[p][0];
    const double e = u[i] - pde.initial_value(x);
    sum += e * e;
    if (adjoint) (*adjoint)[Slot::U][i] += 2.0 * scale * e;
    if (const auto rate = pde.initial_rate(x)) {
      const double et = jet[Slot::Ut][i] - *rate;
      sum += et * et;
      if (adjoint) (*adjoint)[Slot::Ut][i] += 2.0 * scale * et;
    }
  }
  return scale * sum;
}

double boundary_term(const PdeSpec& pde, std::span<const Point> points, const Jet& jet, double scale,
                     Jet* adjoint) {
  double sum = 0.0;
  const auto& u = jet[Slot::U];
  if (pde.boundary_kind() == BoundaryKind::Dirichlet) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto i = static_cast<Eigen::Index>(p);
      const double e = u[i] - pde.boundary_value(points[p]);
      sum += e * e;
      if (adjoint) (*adjoint)[Slot::U][i] += 2.0 * scale * e;
    }
    return scale * sum;
  }
  if (points.size() % 2 != 0) throw_consistency("periodic boundary needs paired points");
  const auto half = static_cast<Eigen::Index>(points.size() / 2);
  const auto& ux = jet[Slot::Ux];
  for (Eigen::Index p = 0; p < half; ++p) {
    const double e0 = u[p] - u[p + half];
    const double e1 = ux[p] - ux[p + half];
    sum += e0 * e0 + e1 * e1;
    if (adjoint) {
      (*adjoint)[Slot::U][p] += 2.0 * scale * e0;
      (*adjoint)[Slot::U][p + half] -= 2.0 * scale * e0;
      (*adjoint)[Slot::Ux][p] += 2.0 * scale * e1;
      (*adjoint)[Slot::Ux][p + half] -= 2.0 * scale * e1;
    }
  }
  return scale * sum;
}

SlotSet initial_slots(const PdeSpec& pde) {
  SlotSet s{Slot::U};
  if (pde.initial_rate(0.0)) s.insert(Slot::Ut);
  return s;
}

SlotSet boundary_slots(const PdeSpec& pde) {
  SlotSet s{Slot::U};
  if (pde.boundary_kind() == BoundaryKind::Periodic) s.insert(Slot::Ux);
  return s;
}

std::size_t boundary_records(const PdeSpec& pde, std::size_t boundary_points) {
  return pde.boundary_kind() == BoundaryKind::Periodic ? boundary_points / 2 : boundary_points;
}

namespace {

enum class Group { Interior, Initial, Boundary };

struct Task {
  Group group;
  std::vector<Point> points;
};

std::vector<Task> make_tasks(const PdeSpec& pde, const CollocationGrid& grid, std::size_t chunk) {
  if (chunk == 0) chunk = 512;
  std::vector<Task> tasks;
  auto split = [&](Group g, const std::vector<std::size_t>& idx) {
    for (std::size_t b = 0; b < idx.size(); b += chunk) {
      Task t{g, {}};
      for (std::size_t i = b; i < std::min(idx.size(), b + chunk); ++i)
        t.points.push_back(grid.points[idx[i]]);
      tasks.push_back(std::move(t));
    }
  };
  split(Group::Interior, grid.interior);
  if (pde.time_dependent()) split(Group::Initial, grid.initial);
  if (pde.boundary_kind() == BoundaryKind::Periodic) {
    if (grid.boundary.size() % 2 != 0) throw_consistency("periodic boundary needs paired points");
    const std::size_t half = grid.boundary.size() / 2;
    for (std::size_t b = 0; b < half; b += chunk) {
      const std::size_t e = std::min(half, b + chunk);
      Task t{Group::Boundary, {}};
      for (std::size_t i = b; i < e; ++i) t.points.push_back(grid.points[grid.boundary[i]]);
      for (std::size_t i = b; i < e; ++i) t.points.push_back(grid.points[grid.boundary[half + i]]);
      tasks.push_back(std::move(t));
    }
  } else {
    split(Group::Boundary, grid.boundary);
  }
  return tasks;
}

struct Scales {
  double interior = 0.0, initial = 0.0, boundary = 0.0;
};

Scales make_scales(const PdeSpec& pde, const CollocationGrid& grid, const LossWeights& w) {
  Scales s;
  if (!grid.interior.empty()) s.interior = w.residual / double(grid.interior.size());
  if (!grid.initial.empty()) s.initial = w.initial / double(grid.initial.size());
  const std::size_t nb = boundary_records(pde, grid.boundary.size());
  if (nb) s.boundary = w.boundary / double(nb);
  return s;
}

SlotSet request_for(const PdeSpec& pde, Group g) {
  switch (g) {
    case Group::Interior: return pde.residual_slots();
    case Group::Initial: return initial_slots(pde);
    case Group::Boundary: return boundary_slots(pde);
  }
  return {};
}

double apply_term(const PdeSpec& pde, std::span<const double> mu, const Task& t, const Jet& jet,
                  const Scales& sc, Jet* adj) {
  switch (t.group) {
    case Group::Interior: return interior_term(pde, mu, t.points, jet, sc.interior, adj);
    case Group::Initial: return initial_term(pde, t.points, jet, sc.initial, adj);
    case Group::Boundary: return boundary_term(pde, t.points, jet, sc.boundary, adj);
  }
  return 0.0;
}

void add(LossBreakdown& b, Group g, double v) {
  switch (g) {
    case Group::Interior: b.residual += v; break;
    case Group::Initial: b.initial += v; break;
    case Group::Boundary: b.boundary += v; break;
  }
}

}  // namespace

PinnLossGrad pinn_loss_grad(const MlpParams& params, const PdeSpec& pde,
                            const CollocationGrid& grid, std::span<const double> mu,
                            const PinnLossOptions& options) {
  pde.check_parameters(mu);
  const auto tasks = make_tasks(pde, grid, options.chunk);
  const Scales sc = make_scales(pde, grid, options.weights);
  const auto n = static_cast<Eigen::Index>(params.parameter_count());

  std::vector<Eigen::VectorXd> grads(tasks.size());
  std::vector<double> losses(tasks.size(), 0.0);
  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    grads[i] = Eigen::VectorXd::Zero(n);
    losses[i] = jet_vjp(
        params, t.points, request_for(pde, t.group), pde.layout(),
        [&](const Jet& jet, Jet& adj) { return apply_term(pde, mu, t, jet, sc, &adj); }, grads[i]);
  });

  PinnLossGrad out;
  out.grad = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    add(out.terms, tasks[i].group, losses[i]);
    out.grad += grads[i];
  }
  // A non-finite loss is returned as is; optimizers treat it as divergence.
  out.loss = out.terms.total();
  return out;
}

LossBreakdown pinn_loss(const MlpParams& params, const PdeSpec& pde, const CollocationGrid& grid,
                        std::span<const double> mu, const PinnLossOptions& options) {
  pde.check_parameters(mu);
  const auto tasks = make_tasks(pde, grid, options.chunk);
  const Scales sc = make_scales(pde, grid, options.weights);
  std::vector<double> losses(tasks.size(), 0.0);
  parallel_for(tasks.size(), options.threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    const Jet jet = forward_jet(params, t.points, request_for(pde, t.group), pde.layout());
    losses[i] = apply_term(pde, mu, t, jet, sc, nullptr);
  });
  LossBreakdown b;
  for (std::size_t i = 0; i < tasks.size(); ++i) add(b, tasks[i].group, losses[i]);
  return b;
}

}  // namespace s2gpt
