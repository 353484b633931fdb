#include "s2gpt/diffnet.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace s2gpt {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Slots carrying the first and second derivative along each input axis.
struct AxisSlots {
  Slot first;
  Slot second;
};

std::array<AxisSlots, 2> axis_slots(InputLayout layout) {
  if (layout == InputLayout::SpaceTime) return {{{Slot::Ux, Slot::Uxx}, {Slot::Ut, Slot::Utt}}};
  return {{{Slot::Ux, Slot::Uxx}, {Slot::Uy, Slot::Uyy}}};
}

struct Needs {
  std::array<bool, 2> d1{};
  std::array<bool, 2> d2{};
};

Needs needs_for(SlotSet request, InputLayout layout) {
  const auto axes = axis_slots(layout);
  Needs n;
  for (int k = 0; k < 2; ++k) {
    n.d2[k] = request.contains(axes[k].second);
    n.d1[k] = n.d2[k] || request.contains(axes[k].first);
  }
  return n;
}

struct Streams {
  MatrixXd v;
  std::array<MatrixXd, 2> d1;
  std::array<MatrixXd, 2> d2;
};

// Hidden layer record: post-activation streams plus pre-activation
// derivative streams (needed by the tanh adjoint).
struct HiddenRecord {
  Streams post;
  std::array<MatrixXd, 2> dz;
  std::array<MatrixXd, 2> sz;
};

struct Tape {
  MatrixXd input;  // 2 x P
  std::vector<HiddenRecord> hidden;
  Streams out;
};

void forward(const MlpParams& params, std::span<const Point> points, const Needs& needs,
             Tape& tape) {
  const Eigen::Index P = static_cast<Eigen::Index>(points.size());
  tape.input.resize(2, P);
  for (Eigen::Index p = 0; p < P; ++p) {
    tape.input(0, p) = points[p][0];
    tape.input(1, p) = points[p][1];
  }
  const std::size_t L = params.weights.size();
  tape.hidden.assign(L - 1, HiddenRecord{});

  const Streams* prev = nullptr;
  for (std::size_t l = 0; l < L; ++l) {
    const MatrixXd& W = params.weights[l];
    Streams z;
    z.v = W * (prev ? prev->v : tape.input);
    z.v.colwise() += params.biases[l];
    for (int k = 0; k < 2; ++k) {
      if (!needs.d1[k]) continue;
      if (prev) {
        z.d1[k] = W * prev->d1[k];
      } else {
        z.d1[k] = W.col(k).replicate(1, P);
      }
      if (needs.d2[k]) {
        if (prev)
          z.d2[k] = W * prev->d2[k];
        else
          z.d2[k] = MatrixXd::Zero(W.rows(), P);
      }
    }
    if (l + 1 == L) {
      tape.out = std::move(z);
      break;
    }
    HiddenRecord& rec = tape.hidden[l];
    rec.post.v = z.v.array().tanh().matrix();
    const auto v = rec.post.v.array();
    const Eigen::ArrayXXd g = 1.0 - v.square();
    for (int k = 0; k < 2; ++k) {
      if (!needs.d1[k]) continue;
      rec.post.d1[k] = (g * z.d1[k].array()).matrix();
      if (needs.d2[k])
        rec.post.d2[k] =
            (g * z.d2[k].array() - 2.0 * v * g * z.d1[k].array().square()).matrix();
      rec.dz[k] = std::move(z.d1[k]);
      rec.sz[k] = std::move(z.d2[k]);
    }
    prev = &rec.post;
  }
}

Jet to_jet(const Streams& out, SlotSet request, InputLayout layout, const Needs& needs) {
  const auto axes = axis_slots(layout);
  Jet j;
  j.present = request | SlotSet{Slot::U};
  j[Slot::U] = out.v.row(0).transpose();
  for (int k = 0; k < 2; ++k) {
    if (request.contains(axes[k].first)) j[axes[k].first] = out.d1[k].row(0).transpose();
    if (needs.d2[k]) j[axes[k].second] = out.d2[k].row(0).transpose();
  }
  return j;
}

std::vector<std::size_t> layer_offsets(const std::vector<int>& layers) {
  std::vector<std::size_t> off(layers.size(), 0);
  for (std::size_t l = 0; l + 1 < layers.size(); ++l)
    off[l + 1] = off[l] + std::size_t(layers[l + 1]) * std::size_t(layers[l] + 1);
  return off;
}

}  // namespace

void validate_layers(std::span<const int> layers) {
  if (layers.size() < 2) throw std::invalid_argument("network needs at least input and output layers");
  for (int n : layers)
    if (n <= 0) throw std::invalid_argument("layer sizes must be positive");
  if (layers.front() != 2) throw std::invalid_argument("input layer must have 2 units");
  if (layers.back() != 1) throw std::invalid_argument("output layer must have 1 unit");
}

std::size_t parameter_count(std::span<const int> layers) {
  std::size_t total = 0;
  for (std::size_t l = 1; l < layers.size(); ++l)
    total += std::size_t(layers[l]) * std::size_t(layers[l - 1] + 1);
  return total;
}

std::size_t MlpParams::parameter_count() const { return s2gpt::parameter_count(layers); }

VectorXd MlpParams::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const MatrixXd& W = weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) flat[o++] = W(r, c);
    flat.segment(o, biases[l].size()) = biases[l];
    o += biases[l].size();
  }
  return flat;
}

void MlpParams::assign(const VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw std::invalid_argument("flat parameter vector has wrong length");
  Eigen::Index o = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    MatrixXd& W = weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = flat[o++];
    biases[l] = flat.segment(o, biases[l].size());
    o += biases[l].size();
  }
}

MlpParams zero_params(std::span<const int> layers) {
  validate_layers(layers);
  MlpParams p;
  p.layers.assign(layers.begin(), layers.end());
  for (std::size_t l = 1; l < layers.size(); ++l) {
    p.weights.push_back(MatrixXd::Zero(layers[l], layers[l - 1]));
    p.biases.push_back(VectorXd::Zero(layers[l]));
  }
  return p;
}

MlpParams init_params(std::span<const int> layers, std::uint64_t seed) {
  MlpParams p = zero_params(layers);
  std::mt19937_64 rng(seed);
  for (MatrixXd& W : p.weights) {
    const double bound = std::sqrt(6.0 / double(W.rows() + W.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = dist(rng);
  }
  return p;
}

const VectorXd& Jet::operator[](Slot s) const {
  if (!present.contains(s))
    throw std::out_of_range("jet has no slot " + std::string(slot_name(s)));
  return slots[index(s)];
}

VectorXd& Jet::operator[](Slot s) { return slots[index(s)]; }

Jet Jet::zeros(SlotSet slots, std::size_t n) {
  Jet j;
  j.present = slots | SlotSet{Slot::U};
  for (Slot s : j.present.list()) j[s] = VectorXd::Zero(static_cast<Eigen::Index>(n));
  return j;
}

SlotVector Jet::at(std::size_t row) const {
  SlotVector s{};
  for (Slot sl : kAllSlots)
    if (present.contains(sl)) s[index(sl)] = slots[index(sl)][static_cast<Eigen::Index>(row)];
  return s;
}

void check_request(SlotSet request, InputLayout layout) {
  const bool steady = layout == InputLayout::SpaceSpace;
  for (Slot s : request.list()) {
    const bool time = s == Slot::Ut || s == Slot::Utt;
    const bool y = s == Slot::Uy || s == Slot::Uyy;
    if ((steady && time) || (!steady && y))
      throw std::invalid_argument("slot " + std::string(slot_name(s)) +
                                  " is not an axis of this input layout");
  }
}

Jet forward_jet(const MlpParams& params, std::span<const Point> points, SlotSet request,
                InputLayout layout) {
  check_request(request, layout);
  const Needs needs = needs_for(request, layout);
  Tape tape;
  forward(params, points, needs, tape);
  return to_jet(tape.out, request, layout, needs);
}

double jet_vjp(const MlpParams& params, std::span<const Point> points, SlotSet request,
               InputLayout layout, const JetSeed& seed, Eigen::Ref<VectorXd> grad) {
  check_request(request, layout);
  if (static_cast<std::size_t>(grad.size()) != params.parameter_count())
    throw std::invalid_argument("gradient buffer has wrong length");
  const Needs needs = needs_for(request, layout);
  const auto axes = axis_slots(layout);
  Tape tape;
  forward(params, points, needs, tape);
  const Jet out = to_jet(tape.out, request, layout, needs);
  Jet adj = Jet::zeros(out.present, out.size());
  const double loss = seed(out, adj);

  const Eigen::Index P = static_cast<Eigen::Index>(points.size());
  const std::size_t L = params.weights.size();
  const auto offsets = layer_offsets(params.layers);

  // Adjoints of the current layer's pre-activation streams.
  MatrixXd zbar = adj[Slot::U].transpose();
  std::array<MatrixXd, 2> dzbar, szbar;
  for (int k = 0; k < 2; ++k) {
    if (!needs.d1[k]) continue;
    dzbar[k] = out.has(axes[k].first) ? MatrixXd(adj[axes[k].first].transpose())
                                      : MatrixXd::Zero(1, P);
    if (needs.d2[k]) szbar[k] = adj[axes[k].second].transpose();
  }

  for (std::size_t l = L; l-- > 0;) {
    const MatrixXd& W = params.weights[l];
    const Eigen::Index rows = W.rows(), cols = W.cols();
    MatrixXd Wbar(rows, cols);
    if (l == 0) {
      Wbar.noalias() = zbar * tape.input.transpose();
      for (int k = 0; k < 2; ++k)
        if (needs.d1[k]) Wbar.col(k) += dzbar[k].rowwise().sum();
    } else {
      const Streams& in = tape.hidden[l - 1].post;
      Wbar.noalias() = zbar * in.v.transpose();
      for (int k = 0; k < 2; ++k) {
        if (!needs.d1[k]) continue;
        Wbar.noalias() += dzbar[k] * in.d1[k].transpose();
        if (needs.d2[k]) Wbar.noalias() += szbar[k] * in.d2[k].transpose();
      }
    }
    std::size_t o = offsets[l];
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) grad[static_cast<Eigen::Index>(o++)] += Wbar(r, c);
    const VectorXd bbar = zbar.rowwise().sum();
    grad.segment(static_cast<Eigen::Index>(o), rows) += bbar;
    if (l == 0) break;

    // Back through W into the previous activation's streams.
    const HiddenRecord& rec = tape.hidden[l - 1];
    MatrixXd abar = W.transpose() * zbar;
    std::array<MatrixXd, 2> dabar, sabar;
    for (int k = 0; k < 2; ++k) {
      if (!needs.d1[k]) continue;
      dabar[k] = W.transpose() * dzbar[k];
      if (needs.d2[k]) sabar[k] = W.transpose() * szbar[k];
    }

    // tanh adjoint: v = tanh z, g = 1 - v^2,
    // d1 = g dz, d2 = g sz - 2 v g dz^2.
    const auto v = rec.post.v.array();
    const Eigen::ArrayXXd g = 1.0 - v.square();
    Eigen::ArrayXXd vbar = abar.array();
    for (int k = 0; k < 2; ++k) {
      if (!needs.d1[k]) continue;
      const auto dz = rec.dz[k].array();
      vbar += -2.0 * v * dz * dabar[k].array();
      Eigen::ArrayXXd dz_adj = g * dabar[k].array();
      if (needs.d2[k]) {
        const auto sz = rec.sz[k].array();
        const auto sa = sabar[k].array();
        vbar += sa * (-2.0 * v * sz - 2.0 * (1.0 - 3.0 * v.square()) * dz.square());
        dz_adj += -4.0 * v * g * dz * sa;
        szbar[k] = (g * sa).matrix();
      }
      dzbar[k] = dz_adj.matrix();
    }
    zbar = (g * vbar).matrix();
  }
  return loss;
}

}  // namespace s2gpt
