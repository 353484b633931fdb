#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace s2gpt {

// Field value and the per-axis partials a residual may read. Mixed partials
// are not represented.
enum class Slot : std::uint8_t { U = 0, Ut, Utt, Ux, Uxx, Uy, Uyy };
inline constexpr std::size_t kSlotCount = 7;
inline constexpr std::array<Slot, kSlotCount> kAllSlots = {
    Slot::U, Slot::Ut, Slot::Utt, Slot::Ux, Slot::Uxx, Slot::Uy, Slot::Uyy};

constexpr std::size_t index(Slot s) { return static_cast<std::size_t>(s); }
std::string_view slot_name(Slot s);
std::optional<Slot> slot_from_name(std::string_view name);

/// Slot values at one point, indexed by `index(Slot)`. Unused slots are zero.
using SlotVector = std::array<double, kSlotCount>;

class SlotSet {
public:
  constexpr SlotSet() = default;
  constexpr SlotSet(std::initializer_list<Slot> slots) {
    for (Slot s : slots) insert(s);
  }

  constexpr void insert(Slot s) { bits_ |= std::uint8_t(1u << index(s)); }
  constexpr bool contains(Slot s) const { return bits_ & (1u << index(s)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr SlotSet operator|(SlotSet o) const {
    SlotSet r;
    r.bits_ = bits_ | o.bits_;
    return r;
  }
  constexpr bool operator==(const SlotSet&) const = default;

  std::vector<Slot> list() const;
  std::size_t size() const;

private:
  std::uint8_t bits_ = 0;
};

/// Coordinates (x, t) for space-time problems, (x, y) for 2-D steady ones.
using Point = std::array<double, 2>;

enum class InputLayout { SpaceTime, SpaceSpace };

struct ParamRange {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct Box2 {
  double lo0 = 0.0, hi0 = 0.0;  // x
  double lo1 = 0.0, hi1 = 0.0;  // t or y
};

enum class BoundaryKind { Dirichlet, Periodic };

struct PdeOptions {
  double helmholtz_k = 1.0;
};

/// A parametric PDE family in slot form. Residuals are strong-form; the
/// unchecked virtuals are the hot path, `residual_eval` adds validation.
class PdeSpec {
public:
  virtual ~PdeSpec() = default;

  virtual std::string_view name() const = 0;
  virtual InputLayout layout() const = 0;
  bool time_dependent() const { return layout() == InputLayout::SpaceTime; }
  int spatial_dimension() const { return time_dependent() ? 1 : 2; }
  virtual Box2 domain() const = 0;
  virtual const std::vector<ParamRange>& parameter_box() const = 0;
  std::size_t parameter_count() const { return parameter_box().size(); }

  /// Slots read by the interior residual.
  virtual SlotSet residual_slots() const = 0;
  /// Slots needed anywhere in the full loss (residual, IC and BC terms).
  virtual SlotSet loss_slots() const = 0;

  virtual double residual(const SlotVector& s, std::span<const double> mu, const Point& p) const = 0;
  virtual SlotVector residual_partials(const SlotVector& s, std::span<const double> mu,
                                       const Point& p) const = 0;

  virtual BoundaryKind boundary_kind() const = 0;
  /// Dirichlet target on the spatial boundary. Periodic problems return 0.
  virtual double boundary_value(const Point& p) const { (void)p; return 0.0; }
  /// True when the Dirichlet data is not identically zero.
  virtual bool inhomogeneous_boundary() const { return false; }

  /// u(x, 0). Only meaningful for space-time problems.
  virtual double initial_value(double x) const { (void)x; return 0.0; }
  /// Target for u_t(x, 0) when the problem prescribes one.
  virtual std::optional<double> initial_rate(double x) const { (void)x; return std::nullopt; }

  virtual bool has_exact_solution() const { return false; }
  virtual double exact_solution(const Point& p, std::span<const double> mu) const;

  bool contains(std::span<const double> mu) const;
  void check_parameters(std::span<const double> mu) const;
};

using PdePtr = std::shared_ptr<const PdeSpec>;

/// Registry of the shipped families: "klein_gordon", "allen_cahn",
/// "burgers", "helmholtz".
PdePtr make_pde(std::string_view name, const PdeOptions& options = {});
std::vector<std::string> pde_names();

/// Validated residual: throws DomainError for mu outside the parameter box
/// and NumericalError if a required slot is not finite.
double residual_eval(const PdeSpec& pde, const SlotVector& slots, std::span<const double> mu,
                     const Point& p);
SlotVector residual_partials(const PdeSpec& pde, const SlotVector& slots,
                             std::span<const double> mu, const Point& p);

// Manufactured Helmholtz solution u = (x^2-1)(y^2-1) sin(a1 pi x) sin(a2 pi y)
// and its analytic jets.
struct HelmholtzSolution {
  double a1 = 1.0;
  double a2 = 1.0;

  double value(double x, double y) const;
  /// u, u_x, u_xx, u_y, u_yy filled; time slots zero.
  SlotVector jet(double x, double y) const;
};

/// q = Laplacian(u) + k^2 u for the manufactured solution at (a1, a2).
class HelmholtzSource {
public:
  HelmholtzSource(double a1, double a2, double k);
  double operator()(double x, double y) const;

private:
  HelmholtzSolution u_;
  double k2_;
};

HelmholtzSource helmholtz_source(std::span<const double> mu, double k);

/// Tensor grid over the parameter box (or `sub_box`, which must lie inside
/// it), first parameter varying slowest. `log_spacing[d]` selects geometric
/// spacing for dimension d. Every count must be at least 2.
std::vector<std::vector<double>> sample_parameter_grid(const PdeSpec& pde,
                                                       std::span<const std::size_t> counts,
                                                       std::span<const bool> log_spacing = {},
                                                       const std::vector<ParamRange>* sub_box = nullptr);

}  // namespace s2gpt
