#include "s2gpt/pde.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include "s2gpt/errors.hpp"

namespace s2gpt {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<std::string_view, kSlotCount> kSlotNames = {"u",  "u_t",  "u_tt", "u_x",
                                                                 "u_xx", "u_y", "u_yy"};

// u_tt + alpha u_xx + beta u + gamma u^2 + x cos t - x^2 cos^2 t = 0
class KleinGordon final : public PdeSpec {
public:
  std::string_view name() const override { return "klein_gordon"; }
  InputLayout layout() const override { return InputLayout::SpaceTime; }
  Box2 domain() const override { return {-1.0, 1.0, 0.0, 5.0}; }
  const std::vector<ParamRange>& parameter_box() const override { return box_; }
  SlotSet residual_slots() const override { return {Slot::U, Slot::Utt, Slot::Uxx}; }
  SlotSet loss_slots() const override { return {Slot::U, Slot::Ut, Slot::Utt, Slot::Uxx}; }

  double residual(const SlotVector& s, std::span<const double> mu, const Point& p) const override {
    const double u = s[index(Slot::U)];
    const double c = std::cos(p[1]);
    return s[index(Slot::Utt)] + mu[0] * s[index(Slot::Uxx)] + mu[1] * u + mu[2] * u * u +
           p[0] * c - p[0] * p[0] * c * c;
  }
  SlotVector residual_partials(const SlotVector& s, std::span<const double> mu,
                               const Point&) const override {
    SlotVector d{};
    d[index(Slot::U)] = mu[1] + 2.0 * mu[2] * s[index(Slot::U)];
    d[index(Slot::Utt)] = 1.0;
    d[index(Slot::Uxx)] = mu[0];
    return d;
  }

  BoundaryKind boundary_kind() const override { return BoundaryKind::Dirichlet; }
  double boundary_value(const Point& p) const override { return p[0] * std::cos(p[1]); }
  bool inhomogeneous_boundary() const override { return true; }
  double initial_value(double x) const override { return x; }
  std::optional<double> initial_rate(double) const override { return 0.0; }

private:
  std::vector<ParamRange> box_ = {{"alpha", -2.0, -1.0}, {"beta", 0.0, 1.0}, {"gamma", 0.0, 1.0}};
};

// u_t - lambda u_xx + eps (u^3 - u) = 0, periodic in x
class AllenCahn final : public PdeSpec {
public:
  std::string_view name() const override { return "allen_cahn"; }
  InputLayout layout() const override { return InputLayout::SpaceTime; }
  Box2 domain() const override { return {-1.0, 1.0, 0.0, 1.0}; }
  const std::vector<ParamRange>& parameter_box() const override { return box_; }
  SlotSet residual_slots() const override { return {Slot::U, Slot::Ut, Slot::Uxx}; }
  SlotSet loss_slots() const override { return {Slot::U, Slot::Ut, Slot::Ux, Slot::Uxx}; }

  double residual(const SlotVector& s, std::span<const double> mu, const Point&) const override {
    const double u = s[index(Slot::U)];
    return s[index(Slot::Ut)] - mu[0] * s[index(Slot::Uxx)] + mu[1] * (u * u * u - u);
  }
  SlotVector residual_partials(const SlotVector& s, std::span<const double> mu,
                               const Point&) const override {
    SlotVector d{};
    const double u = s[index(Slot::U)];
    d[index(Slot::U)] = mu[1] * (3.0 * u * u - 1.0);
    d[index(Slot::Ut)] = 1.0;
    d[index(Slot::Uxx)] = -mu[0];
    return d;
  }

  BoundaryKind boundary_kind() const override { return BoundaryKind::Periodic; }
  double initial_value(double x) const override { return x * x * std::cos(kPi * x); }

private:
  std::vector<ParamRange> box_ = {{"lambda", 1e-4, 1e-3}, {"epsilon", 1.0, 5.0}};
};

// u_t + u u_x - nu u_xx = 0
class Burgers final : public PdeSpec {
public:
  std::string_view name() const override { return "burgers"; }
  InputLayout layout() const override { return InputLayout::SpaceTime; }
  Box2 domain() const override { return {-1.0, 1.0, 0.0, 1.0}; }
  const std::vector<ParamRange>& parameter_box() const override { return box_; }
  SlotSet residual_slots() const override { return {Slot::U, Slot::Ut, Slot::Ux, Slot::Uxx}; }
  SlotSet loss_slots() const override { return residual_slots(); }

  double residual(const SlotVector& s, std::span<const double> mu, const Point&) const override {
    return s[index(Slot::Ut)] + s[index(Slot::U)] * s[index(Slot::Ux)] - mu[0] * s[index(Slot::Uxx)];
  }
  SlotVector residual_partials(const SlotVector& s, std::span<const double> mu,
                               const Point&) const override {
    SlotVector d{};
    d[index(Slot::U)] = s[index(Slot::Ux)];
    d[index(Slot::Ut)] = 1.0;
    d[index(Slot::Ux)] = s[index(Slot::U)];
    d[index(Slot::Uxx)] = -mu[0];
    return d;
  }

  BoundaryKind boundary_kind() const override { return BoundaryKind::Dirichlet; }
  double initial_value(double x) const override { return -std::sin(kPi * x); }

private:
  std::vector<ParamRange> box_ = {{"nu", 0.005, 1.0}};
};

// u_xx + u_yy + k^2 u - q = 0 with homogeneous Dirichlet data
class Helmholtz final : public PdeSpec {
public:
  explicit Helmholtz(double k) : k_(k) {}

  std::string_view name() const override { return "helmholtz"; }
  InputLayout layout() const override { return InputLayout::SpaceSpace; }
  Box2 domain() const override { return {-1.0, 1.0, -1.0, 1.0}; }
  const std::vector<ParamRange>& parameter_box() const override { return box_; }
  SlotSet residual_slots() const override { return {Slot::U, Slot::Uxx, Slot::Uyy}; }
  SlotSet loss_slots() const override { return residual_slots(); }

  double residual(const SlotVector& s, std::span<const double> mu, const Point& p) const override {
    const HelmholtzSource q(mu[0], mu[1], k_);
    return s[index(Slot::Uxx)] + s[index(Slot::Uyy)] + k_ * k_ * s[index(Slot::U)] - q(p[0], p[1]);
  }
  SlotVector residual_partials(const SlotVector&, std::span<const double>,
                               const Point&) const override {
    SlotVector d{};
    d[index(Slot::U)] = k_ * k_;
    d[index(Slot::Uxx)] = 1.0;
    d[index(Slot::Uyy)] = 1.0;
    return d;
  }

  BoundaryKind boundary_kind() const override { return BoundaryKind::Dirichlet; }
  bool has_exact_solution() const override { return true; }
  double exact_solution(const Point& p, std::span<const double> mu) const override {
    return HelmholtzSolution{mu[0], mu[1]}.value(p[0], p[1]);
  }

private:
  double k_;
  std::vector<ParamRange> box_ = {{"a1", 1.0, 2.0}, {"a2", 1.0, 4.0}};
};

bool inside(double v, const ParamRange& r) {
  const double slack = 1e-12 * std::max(1.0, std::abs(r.hi - r.lo));
  return v >= r.lo - slack && v <= r.hi + slack;
}

std::string describe(std::span<const double> mu) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < mu.size(); ++i) os << (i ? ", " : "") << mu[i];
  os << ')';
  return os.str();
}

}  // namespace

std::string_view slot_name(Slot s) { return kSlotNames[index(s)]; }

std::optional<Slot> slot_from_name(std::string_view name) {
  for (Slot s : kAllSlots)
    if (kSlotNames[index(s)] == name) return s;
  return std::nullopt;
}

std::vector<Slot> SlotSet::list() const {
  std::vector<Slot> out;
  for (Slot s : kAllSlots)
    if (contains(s)) out.push_back(s);
  return out;
}

std::size_t SlotSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

double PdeSpec::exact_solution(const Point&, std::span<const double>) const {
  throw std::logic_error(std::string(name()) + " has no exact solution");
}

bool PdeSpec::contains(std::span<const double> mu) const {
  const auto& box = parameter_box();
  if (mu.size() != box.size()) return false;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!inside(mu[i], box[i])) return false;
  return true;
}

void PdeSpec::check_parameters(std::span<const double> mu) const {
  if (mu.size() != parameter_count())
    throw DomainError(std::string(name()) + ": expected " + std::to_string(parameter_count()) +
                      " parameters, got " + std::to_string(mu.size()));
  if (!contains(mu))
    throw DomainError(std::string(name()) + ": parameter " + describe(mu) +
                      " outside the parameter box");
}

PdePtr make_pde(std::string_view name, const PdeOptions& options) {
  if (name == "klein_gordon") return std::make_shared<KleinGordon>();
  if (name == "allen_cahn") return std::make_shared<AllenCahn>();
  if (name == "burgers") return std::make_shared<Burgers>();
  if (name == "helmholtz") return std::make_shared<Helmholtz>(options.helmholtz_k);
  throw ConfigError("unknown pde '" + std::string(name) + "'");
}

std::vector<std::string> pde_names() { return {"klein_gordon", "allen_cahn", "burgers", "helmholtz"}; }

namespace {
void check_slots(const PdeSpec& pde, const SlotVector& slots) {
  for (Slot s : pde.residual_slots().list())
    if (!std::isfinite(slots[index(s)]))
      throw NumericalError(std::string(pde.name()) + ": non-finite slot " +
                           std::string(slot_name(s)));
}
}  // namespace

double residual_eval(const PdeSpec& pde, const SlotVector& slots, std::span<const double> mu,
                     const Point& p) {
  pde.check_parameters(mu);
  check_slots(pde, slots);
  return pde.residual(slots, mu, p);
}

SlotVector residual_partials(const PdeSpec& pde, const SlotVector& slots,
                             std::span<const double> mu, const Point& p) {
  pde.check_parameters(mu);
  check_slots(pde, slots);
  return pde.residual_partials(slots, mu, p);
}

double HelmholtzSolution::value(double x, double y) const {
  return (x * x - 1.0) * (y * y - 1.0) * std::sin(a1 * kPi * x) * std::sin(a2 * kPi * y);
}

SlotVector HelmholtzSolution::jet(double x, double y) const {
  // u = X(x) Y(y), X = (x^2-1) sin(w x)
  auto factor = [](double s, double w, double& f, double& f1, double& f2) {
    const double sn = std::sin(w * s), cs = std::cos(w * s);
    f = (s * s - 1.0) * sn;
    f1 = 2.0 * s * sn + (s * s - 1.0) * w * cs;
    f2 = 2.0 * sn + 4.0 * s * w * cs - (s * s - 1.0) * w * w * sn;
  };
  double X, X1, X2, Y, Y1, Y2;
  factor(x, a1 * kPi, X, X1, X2);
  factor(y, a2 * kPi, Y, Y1, Y2);
  SlotVector j{};
  j[index(Slot::U)] = X * Y;
  j[index(Slot::Ux)] = X1 * Y;
  j[index(Slot::Uxx)] = X2 * Y;
  j[index(Slot::Uy)] = X * Y1;
  j[index(Slot::Uyy)] = X * Y2;
  return j;
}

HelmholtzSource::HelmholtzSource(double a1, double a2, double k) : u_{a1, a2}, k2_(k * k) {}

double HelmholtzSource::operator()(double x, double y) const {
  const SlotVector j = u_.jet(x, y);
  return j[index(Slot::Uxx)] + j[index(Slot::Uyy)] + k2_ * j[index(Slot::U)];
}

HelmholtzSource helmholtz_source(std::span<const double> mu, double k) {
  static const Helmholtz reference(1.0);
  reference.check_parameters(mu);
  return HelmholtzSource(mu[0], mu[1], k);
}

std::vector<std::vector<double>> sample_parameter_grid(const PdeSpec& pde,
                                                       std::span<const std::size_t> counts,
                                                       std::span<const bool> log_spacing,
                                                       const std::vector<ParamRange>* sub_box) {
  const auto& full = pde.parameter_box();
  const std::vector<ParamRange>& box = sub_box ? *sub_box : full;
  if (counts.size() != full.size() || box.size() != full.size())
    throw ConfigError(std::string(pde.name()) + ": parameter grid needs " +
                      std::to_string(full.size()) + " counts");
  if (!log_spacing.empty() && log_spacing.size() != full.size())
    throw ConfigError("log_spacing length must match the parameter count");

  std::vector<std::vector<double>> axes(full.size());
  for (std::size_t d = 0; d < full.size(); ++d) {
    if (counts[d] < 2) throw ConfigError("parameter grid needs at least 2 values per dimension");
    if (!inside(box[d].lo, full[d]) || !inside(box[d].hi, full[d]) || box[d].lo > box[d].hi)
      throw DomainError("parameter sub-box for '" + full[d].name + "' is outside the domain");
    const bool geometric = !log_spacing.empty() && log_spacing[d];
    if (geometric && box[d].lo <= 0.0)
      throw ConfigError("log spacing requires a positive lower bound");
    const double n = static_cast<double>(counts[d] - 1);
    for (std::size_t i = 0; i < counts[d]; ++i) {
      double v;
      if (i + 1 == counts[d]) {
        v = box[d].hi;
      } else if (geometric) {
        const double l0 = std::log10(box[d].lo), l1 = std::log10(box[d].hi);
        v = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) / n);
      } else {
        v = box[d].lo + (box[d].hi - box[d].lo) * static_cast<double>(i) / n;
      }
      axes[d].push_back(v);
    }
  }

  std::vector<std::vector<double>> out;
  std::vector<std::size_t> idx(full.size(), 0);
  while (true) {
    std::vector<double> mu(full.size());
    for (std::size_t d = 0; d < full.size(); ++d) mu[d] = axes[d][idx[d]];
    out.push_back(std::move(mu));
    std::size_t d = full.size();
    while (d > 0) {
      --d;
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
      if (d == 0) return out;
    }
  }
}

}  // namespace s2gpt
