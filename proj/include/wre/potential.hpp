#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "wre/grid.hpp"

namespace wre {

using Point = std::array<double, 3>;

/// Potential / weight V on R^n. Either an analytic spec (inverse-square,
/// truncated power, Gaussian, indicator of ball/cube/strip, finite sums,
/// rescalings) or samples on a grid. Evaluation is finite away from a
/// declared singular set; when a grid node lands on it, sampling takes a
/// subsampled cell average instead.
class Potential {
 public:
  Potential();  // zero potential

  // a / |x|^2 restricted to r0 <= |x| < r1 (r1 may be infinity).
  static Potential inverse_square(double a, double r0, double r1);
  // a |x|^{-gamma} restricted to r0 <= |x| < r1 (gamma < 0 grows).
  static Potential power(double a, double gamma, double r0, double r1);
  // a |x_axis|^{-gamma}: power profile in a single coordinate.
  static Potential axis_power(double a, double gamma, int axis);
  static Potential gaussian(double a, double s);
  static Potential ball(double a, const Point& center, double radius);
  static Potential cube(double a, const Point& center, double side);
  // a on {lo <= <x,v> < hi} (a strip orthogonal to unit vector v).
  static Potential strip(double a, const Point& v, double lo, double hi);
  static Potential constant(double a);
  static Potential sum(std::vector<Potential> parts);
  static Potential sampled(const Grid& g, std::vector<double> values);

  /// lambda^2 V(lambda x) -- the rescaling forced by the equation.
  Potential scaled(double lambda) const;
  /// Pointwise |V|^p.
  Potential pointwise_power(double p) const;
  /// V plus a regularization floor delta * min(1, |x|^{-2}).
  Potential with_floor(double delta) const;

  double eval(const Point& x) const;
  /// Node samples with the singular-cell average rule.
  std::vector<double> sample(const Grid& g) const;

  double support_radius() const;  // sup norm radius of the support (inf allowed)
  /// Exponent gamma with V ~ c |x|^{-gamma} at the origin (0 when bounded).
  double origin_exponent() const;
  /// True when the tail decays like a power |x|^{-gamma} with unbounded support.
  bool unbounded_support() const;

  /// True when the exact integral of |V|^p over R^n diverges (analytic
  /// specs only; sampled potentials are treated as bounded and compact).
  bool lp_divergent(double p, int n) const;

  std::string describe() const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  explicit Potential(std::shared_ptr<const Node> n);
};

}  // namespace wre
