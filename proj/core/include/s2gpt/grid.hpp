#pragma once

#include <cstddef>
#include <vector>

#include "s2gpt/pde.hpp"

namespace s2gpt {

/// Resolution knobs of a collocation grid.
///
/// Space-time problems: `n0 x n1` interior points (x strictly inside, t in
/// (0, T]), `n_initial` points on the t = 0 slice (x strictly inside) and
/// `n_boundary` points on each of x = lo and x = hi (t in (0, T]).
///
/// 2-D steady problems: `n0 x n1` strictly interior points and `n_boundary`
/// points on each of the four sides (corners excluded); `n_initial` must be 0.
struct GridResolution {
  std::size_t n0 = 0;
  std::size_t n1 = 0;
  std::size_t n_initial = 0;
  std::size_t n_boundary = 0;

  bool operator==(const GridResolution&) const = default;
};

/// Defaults whose point totals are 11024, 20612, 10200 and 66436 for
/// klein_gordon, allen_cahn, burgers and helmholtz.
GridResolution default_resolution(const PdeSpec& pde);

struct CollocationGrid {
  InputLayout layout = InputLayout::SpaceTime;
  GridResolution resolution;
  std::vector<Point> points;
  std::vector<std::size_t> interior;
  // Space-time: the x = lo block followed by the x = hi block, paired by
  // position (same t). Steady 2-D: sides in the order x=lo, x=hi, y=lo, y=hi.
  std::vector<std::size_t> boundary;
  std::vector<std::size_t> initial;

  std::size_t size() const { return points.size(); }
  std::vector<Point> gather(const std::vector<std::size_t>& indices) const;
};

CollocationGrid build_grid(const PdeSpec& pde, const GridResolution& res);

/// Closed tensor grid (endpoints included), first coordinate slowest.
std::vector<Point> tensor_points(const Box2& box, std::size_t n0, std::size_t n1);

}  // namespace s2gpt
