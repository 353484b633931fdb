#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "s2gpt/diffnet.hpp"
#include "s2gpt/grid.hpp"
#include "s2gpt/pde.hpp"

namespace s2gpt {

struct LossWeights {
  double residual = 1.0;
  double initial = 1.0;
  double boundary = 1.0;
};

struct LossBreakdown {
  double residual = 0.0;
  double initial = 0.0;
  double boundary = 0.0;
  double total() const { return residual + initial + boundary; }
};

// Pointwise loss terms on a jet aligned with `points`. Each returns
// scale * (sum of squared mismatches) and, when `adjoint` is non-null, adds
// the derivative of that contribution with respect to every slot value.

double interior_term(const PdeSpec& pde, std::span<const double> mu, std::span<const Point> points,
                     const Jet& jet, double scale, Jet* adjoint);

/// (u - u0)^2, plus (u_t - u_t0)^2 where the problem prescribes an initial rate.
double initial_term(const PdeSpec& pde, std::span<const Point> points, const Jet& jet, double scale,
                    Jet* adjoint);

/// Dirichlet: (u - g)^2. Periodic: the first half of `points` is paired with
/// the second half; (u_l - u_r)^2 + (u_x,l - u_x,r)^2 per pair.
double boundary_term(const PdeSpec& pde, std::span<const Point> points, const Jet& jet, double scale,
                     Jet* adjoint);

SlotSet initial_slots(const PdeSpec& pde);
SlotSet boundary_slots(const PdeSpec& pde);

/// Number of squared-mismatch records a boundary partition contributes
/// (pairs for periodic problems).
std::size_t boundary_records(const PdeSpec& pde, std::size_t boundary_points);

struct PinnLossOptions {
  LossWeights weights;
  std::size_t chunk = 512;
  std::size_t threads = 1;
};

struct PinnLossGrad {
  double loss = 0.0;
  LossBreakdown terms;
  Eigen::VectorXd grad;
};

/// Full PINN loss (mean-squared residual, IC and BC mismatch, each weighted)
/// and its exact gradient over every network parameter. Chunk results are
/// reduced in a fixed order, so the value does not depend on `threads`.
PinnLossGrad pinn_loss_grad(const MlpParams& params, const PdeSpec& pde,
                            const CollocationGrid& grid, std::span<const double> mu,
                            const PinnLossOptions& options = {});

/// Loss only (forward passes).
LossBreakdown pinn_loss(const MlpParams& params, const PdeSpec& pde, const CollocationGrid& grid,
                        std::span<const double> mu, const PinnLossOptions& options = {});

}  // namespace s2gpt
