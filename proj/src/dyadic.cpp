#include "wre/dyadic.hpp"

#include <cmath>
#include <stdexcept>

namespace wre {

double Cube::volume(const Grid& g) const {
  double v = 1;
  for (int a = 0; a < g.n; ++a) v *= side(g);
  return v;
}

int DyadicCubeSet::max_depth(const Grid& g) {
  return static_cast<int>(std::lround(std::log2(double(g.N)))) - 2;
}

DyadicCubeSet::DyadicCubeSet(const Grid& g, int d_min, int d_max, bool with_shifts)
    : grid_(g), d_min_(d_min), d_max_(d_max) {
  if (d_min < 0 || d_max < d_min || d_max > max_depth(g))
    throw std::invalid_argument("DyadicCubeSet: depth range out of [0, log2(N)-2]");
  for (int d = d_min; d <= d_max; ++d) {
    int cells = g.N >> d;
    int step = with_shifts ? cells / 2 : cells;
    int npos = (g.N - cells) / step + 1;
    std::array<int, 3> idx{0, 0, 0};
    int total = 1;
    for (int a = 0; a < g.n; ++a) total *= npos;
    for (int t = 0; t < total; ++t) {
      int r = t;
      Cube c;
      bool shifted = false;
      for (int a = 0; a < g.n; ++a) {
        idx[a] = r % npos;
        r /= npos;
        c.lo[a] = idx[a] * step;
        if (c.lo[a] % cells != 0) shifted = true;
      }
      c.cells = cells;
      c.depth = d;
      c.shifted = shifted;
      cubes_.push_back(c);
    }
  }
}

SummedTable::SummedTable(const Grid& g, const std::vector<double>& values) : grid_(g) {
  if (static_cast<std::int64_t>(values.size()) != g.points())
    throw std::invalid_argument("SummedTable: size mismatch");
  int N = g.N;
  int N1 = g.n >= 2 ? N : 1;
  int N2 = g.n >= 3 ? N : 1;
  acc_.assign(static_cast<size_t>(N + 1) * (N1 + 1) * (N2 + 1), 0.0);
  auto A = [&](int i, int j, int k) -> double& {
    return acc_[(static_cast<size_t>(i) * (N1 + 1) + j) * (N2 + 1) + k];
  };
  for (int i = 1; i <= N; ++i)
    for (int j = 1; j <= N1; ++j)
      for (int k = 1; k <= N2; ++k) {
        std::int64_t flat = ((std::int64_t(i - 1) * (g.n >= 2 ? N : 1)) + (g.n >= 2 ? j - 1 : 0));
        flat = flat * (g.n >= 3 ? N : 1) + (g.n >= 3 ? k - 1 : 0);
        A(i, j, k) = values[static_cast<size_t>(flat)] + A(i - 1, j, k) + A(i, j - 1, k) +
                     A(i, j, k - 1) - A(i - 1, j - 1, k) - A(i - 1, j, k - 1) -
                     A(i, j - 1, k - 1) + A(i - 1, j - 1, k - 1);
      }
}

double SummedTable::at(int i0, int i1, int i2) const {
  int N = grid_.N;
  int N1 = grid_.n >= 2 ? N : 1;
  int N2 = grid_.n >= 3 ? N : 1;
  return acc_[(static_cast<size_t>(i0) * (N1 + 1) + i1) * (N2 + 1) + i2];
}

double SummedTable::cube_sum(const Cube& c) const {
  int a0 = c.lo[0], b0 = c.lo[0] + c.cells;
  int a1 = grid_.n >= 2 ? c.lo[1] : 0, b1 = grid_.n >= 2 ? c.lo[1] + c.cells : 1;
  int a2 = grid_.n >= 3 ? c.lo[2] : 0, b2 = grid_.n >= 3 ? c.lo[2] + c.cells : 1;
  return at(b0, b1, b2) - at(a0, b1, b2) - at(b0, a1, b2) - at(b0, b1, a2) +
         at(a0, a1, b2) + at(a0, b1, a2) + at(b0, a1, a2) - at(a0, a1, a2);
}

}  // namespace wre
