#include "s2gpt/grid.hpp"

#include <string>

#include "s2gpt/errors.hpp"

namespace s2gpt {

namespace {

// n points strictly inside (lo, hi), uniformly spaced.
double open_node(double lo, double hi, std::size_t i, std::size_t n) {
  return lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n + 1);
}

// n points in (lo, hi], uniformly spaced.
double half_open_node(double lo, double hi, std::size_t i, std::size_t n) {
  return lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
}

}  // namespace

GridResolution default_resolution(const PdeSpec& pde) {
  const auto name = pde.name();
  if (name == "klein_gordon") return {100, 100, 100, 462};
  if (name == "allen_cahn") return {200, 100, 212, 200};
  if (name == "burgers") return {100, 100, 100, 50};
  if (name == "helmholtz") return {256, 256, 0, 225};
  return {50, 50, 50, 25};
}

std::vector<Point> CollocationGrid::gather(const std::vector<std::size_t>& indices) const {
  std::vector<Point> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(points.at(i));
  return out;
}

CollocationGrid build_grid(const PdeSpec& pde, const GridResolution& res) {
  if (res.n0 == 0 || res.n1 == 0 || res.n_boundary == 0)
    throw ConfigError("grid resolutions must be positive");
  const Box2 box = pde.domain();
  CollocationGrid g;
  g.layout = pde.layout();
  g.resolution = res;

  auto push = [&g](double a, double b, std::vector<std::size_t>& part) {
    part.push_back(g.points.size());
    g.points.push_back({a, b});
  };

  if (pde.time_dependent()) {
    if (res.n_initial == 0) throw ConfigError("space-time grids need a positive n_initial");
    for (std::size_t i = 0; i < res.n0; ++i)
      for (std::size_t j = 0; j < res.n1; ++j)
        push(open_node(box.lo0, box.hi0, i, res.n0), half_open_node(box.lo1, box.hi1, j, res.n1),
             g.interior);
    for (std::size_t i = 0; i < res.n_initial; ++i)
      push(open_node(box.lo0, box.hi0, i, res.n_initial), box.lo1, g.initial);
    for (double x : {box.lo0, box.hi0})
      for (std::size_t j = 0; j < res.n_boundary; ++j)
        push(x, half_open_node(box.lo1, box.hi1, j, res.n_boundary), g.boundary);
  } else {
    if (res.n_initial != 0) throw ConfigError("steady grids take n_initial = 0");
    for (std::size_t i = 0; i < res.n0; ++i)
      for (std::size_t j = 0; j < res.n1; ++j)
        push(open_node(box.lo0, box.hi0, i, res.n0), open_node(box.lo1, box.hi1, j, res.n1),
             g.interior);
    const std::size_t nb = res.n_boundary;
    for (double x : {box.lo0, box.hi0})
      for (std::size_t j = 0; j < nb; ++j) push(x, open_node(box.lo1, box.hi1, j, nb), g.boundary);
    for (double y : {box.lo1, box.hi1})
      for (std::size_t i = 0; i < nb; ++i) push(open_node(box.lo0, box.hi0, i, nb), y, g.boundary);
  }
  return g;
}

std::vector<Point> tensor_points(const Box2& box, std::size_t n0, std::size_t n1) {
  if (n0 < 2 || n1 < 2) throw ConfigError("tensor grid needs at least 2 points per axis");
  std::vector<Point> out;
  out.reserve(n0 * n1);
  for (std::size_t i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      out.push_back({box.lo0 + (box.hi0 - box.lo0) * double(i) / double(n0 - 1),
                     box.lo1 + (box.hi1 - box.lo1) * double(j) / double(n1 - 1)});
  return out;
}

}  // namespace s2gpt
