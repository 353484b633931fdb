#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "s2gpt/pde.hpp"

namespace s2gpt {

/// Fully connected network: tanh on hidden layers, identity on the output.
/// `weights[l]` maps layer l to layer l+1 and has shape
/// layers[l+1] x layers[l].
struct MlpParams {
  std::vector<int> layers;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t parameter_count() const;
  /// Per layer: W row-major, then b.
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

std::size_t parameter_count(std::span<const int> layers);
void validate_layers(std::span<const int> layers);

/// Glorot-uniform weights, zero biases. Deterministic in `seed`.
MlpParams init_params(std::span<const int> layers, std::uint64_t seed);
MlpParams zero_params(std::span<const int> layers);

/// Per-slot columns aligned with a point list. `U` is always present.
struct Jet {
  SlotSet present;
  std::array<Eigen::VectorXd, kSlotCount> slots;

  std::size_t size() const { return static_cast<std::size_t>(slots[index(Slot::U)].size()); }
  bool has(Slot s) const { return present.contains(s); }
  const Eigen::VectorXd& operator[](Slot s) const;
  Eigen::VectorXd& operator[](Slot s);

  /// Zero-filled jet with the given slots (plus U).
  static Jet zeros(SlotSet slots, std::size_t n);
  SlotVector at(std::size_t row) const;
};

/// Throws std::invalid_argument when `request` names an axis the layout lacks.
void check_request(SlotSet request, InputLayout layout);

/// Exact network values and requested per-axis input derivatives, by
/// propagating (value, d/dx_k, d^2/dx_k^2) through every layer.
Jet forward_jet(const MlpParams& params, std::span<const Point> points, SlotSet request,
                InputLayout layout);

/// Pointwise loss seed: receives the forward jet, returns its loss
/// contribution and writes dLoss/dslot into `adjoint` (pre-sized, zeroed).
using JetSeed = std::function<double(const Jet& jet, Jet& adjoint)>;

/// Forward pass, seed, and reverse accumulation of dLoss/dparams into `grad`
/// (flat layout of MlpParams::flatten). Returns the seed's loss.
double jet_vjp(const MlpParams& params, std::span<const Point> points, SlotSet request,
               InputLayout layout, const JetSeed& seed, Eigen::Ref<Eigen::VectorXd> grad);

}  // namespace s2gpt
