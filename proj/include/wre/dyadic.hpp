#pragma once

#include <cstdint>
#include <vector>

#include "wre/grid.hpp"

namespace wre {

/// Axis-aligned cube of grid cells: [lo, lo+cells) per axis, side cells*h.
struct Cube {
  std::array<int, 3> lo{0, 0, 0};
  int cells = 0;
  int depth = 0;
  bool shifted = false;  // half-side translate of a dyadic cube

  double side(const Grid& g) const { return cells * g.h(); }
  double volume(const Grid& g) const;
};

/// Dyadic descendants of the root cube [-L,L)^n for depths in
/// [d_min, d_max], optionally augmented with half-side-shifted copies.
/// Children partition the parent exactly; side at depth d is 2L*2^-d.
class DyadicCubeSet {
 public:
  DyadicCubeSet(const Grid& g, int d_min, int d_max, bool with_shifts);

  const Grid& grid() const { return grid_; }
  const std::vector<Cube>& cubes() const { return cubes_; }
  int d_min() const { return d_min_; }
  int d_max() const { return d_max_; }

  static int max_depth(const Grid& g);  // log2(N) - 2

 private:
  Grid grid_;
  int d_min_, d_max_;
  std::vector<Cube> cubes_;
};

/// Inclusive prefix-sum table over spatial cell values for O(1) cube sums.
class SummedTable {
 public:
  SummedTable(const Grid& g, const std::vector<double>& values);
  /// Sum of values over the cells of the cube (no h^n factor).
  double cube_sum(const Cube& c) const;

 private:
  Grid grid_;
  std::vector<double> acc_;
  double at(int i0, int i1, int i2) const;
};

}  // namespace wre
