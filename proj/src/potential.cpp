#include "wre/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wre {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double dist(const Point& x, const Point& c, int n) {
  double s = 0;
  for (int a = 0; a < n; ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
  return std::sqrt(s);
}

double dot(const Point& x, const Point& v, int n) {
  double s = 0;
  for (int a = 0; a < n; ++a) s += x[a] * v[a];
  return s;
}

}  // namespace

struct Potential::Node {
  enum class Kind { Zero, Power, AxisPower, Gaussian, Ball, Cube, Strip, Constant,
                    Sum, Sampled, Scaled, Pow, Floor } kind = Kind::Zero;
  // Power: a * |x|^-gamma on r0 <= |x| < r1  (inverse-square is gamma = 2)
  double a = 0, gamma = 0, r0 = 0, r1 = kInf;
  double s = 1;             // Gaussian width
  Point center{0, 0, 0};    // ball / cube center, strip direction
  double radius = 0, side = 0, lo = 0, hi = 0;
  std::vector<Potential> parts;
  Grid grid;                // Sampled
  std::vector<double> values;
  std::shared_ptr<const Node> base;  // Scaled / Pow / Floor
  double lambda = 1, p = 1, delta = 0;
  int axis = 0;  // AxisPower
};

Potential::Potential() : node_(std::make_shared<Node>()) {}
Potential::Potential(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

Potential Potential::inverse_square(double a, double r0, double r1) {
  return power(a, 2.0, r0, r1);
}

Potential Potential::power(double a, double gamma, double r0, double r1) {
  if (!(a >= 0) || !(r0 >= 0) || !(r1 > r0))
    throw std::invalid_argument("Potential::power: need a>=0, 0<=r0<r1");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Power;
  n->a = a; n->gamma = gamma; n->r0 = r0; n->r1 = r1;
  return Potential(n);
}

Potential Potential::axis_power(double a, double gamma, int axis) {
  if (!(a >= 0) || axis < 0 || axis > 2)
    throw std::invalid_argument("Potential::axis_power: need a>=0 and axis in 0..2");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::AxisPower;
  n->a = a; n->gamma = gamma; n->axis = axis;
  return Potential(n);
}

Potential Potential::gaussian(double a, double s) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Gaussian;
  n->a = a; n->s = s;
  return Potential(n);
}

Potential Potential::ball(double a, const Point& center, double radius) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Ball;
  n->a = a; n->center = center; n->radius = radius;
  return Potential(n);
}

Potential Potential::cube(double a, const Point& center, double side) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Cube;
  n->a = a; n->center = center; n->side = side;
  return Potential(n);
}

Potential Potential::strip(double a, const Point& v, double lo, double hi) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Strip;
  n->a = a; n->center = v; n->lo = lo; n->hi = hi;
  return Potential(n);
}

Potential Potential::constant(double a) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Constant;
  n->a = a;
  return Potential(n);
}

Potential Potential::sum(std::vector<Potential> parts) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Sum;
  n->parts = std::move(parts);
  return Potential(n);
}

Potential Potential::sampled(const Grid& g, std::vector<double> values) {
  if (static_cast<std::int64_t>(values.size()) != g.points())
    throw std::invalid_argument("Potential::sampled: size mismatch with grid");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Sampled;
  n->grid = g;
  n->values = std::move(values);
  return Potential(n);
}

Potential Potential::scaled(double lambda) const {
  if (!(lambda > 0)) throw std::invalid_argument("Potential::scaled: lambda must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Scaled;
  n->base = node_;
  n->lambda = lambda;
  return Potential(n);
}

Potential Potential::pointwise_power(double p) const {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Pow;
  n->base = node_;
  n->p = p;
  return Potential(n);
}

Potential Potential::with_floor(double delta) const {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Floor;
  n->base = node_;
  n->delta = delta;
  return Potential(n);
}

double Potential::eval(const Point& x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Zero:
      return 0;
    case Node::Kind::Power: {
      double r = dist(x, {0, 0, 0}, 3);
      if (r < n.r0 || r >= n.r1) return 0;
      if (r == 0) return n.gamma > 0 ? kInf : (n.gamma == 0 ? n.a : 0.0);
      return n.a * std::pow(r, -n.gamma);
    }
    case Node::Kind::AxisPower: {
      double t = std::abs(x[n.axis]);
      if (t == 0) return n.gamma > 0 ? kInf : (n.gamma == 0 ? n.a : 0.0);
      return n.a * std::pow(t, -n.gamma);
    }
    case Node::Kind::Gaussian: {
      double r2 = 0;
      for (int a = 0; a < 3; ++a) r2 += x[a] * x[a];
      return n.a * std::exp(-r2 / (n.s * n.s));
    }
    case Node::Kind::Ball:
      return dist(x, n.center, 3) < n.radius ? n.a : 0;
    case Node::Kind::Cube: {
      // half-open box [c - side/2, c + side/2) per axis
      for (int a = 0; a < 3; ++a) {
        double d = x[a] - n.center[a];
        if (d < -n.side / 2 || d >= n.side / 2) return 0;
      }
      return n.a;
    }
    case Node::Kind::Strip: {
      double t = dot(x, n.center, 3);
      return (t >= n.lo && t < n.hi) ? n.a : 0;
    }
    case Node::Kind::Constant:
      return n.a;
    case Node::Kind::Sum: {
      double s = 0;
      for (const auto& p : n.parts) s += p.eval(x);
      return s;
    }
    case Node::Kind::Sampled: {
      // nearest-node lookup; out of box evaluates to 0
      const Grid& g = n.grid;
      std::int64_t flat = 0;
      for (int a = 0; a < g.n; ++a) {
        long i = std::lround((x[a] + g.L) / g.h());
        if (i < 0 || i >= g.N) return 0;
        flat = flat * g.N + i;
      }
      return n.values[static_cast<size_t>(flat)];
    }
    case Node::Kind::Scaled: {
      Point y{x[0] * n.lambda, x[1] * n.lambda, x[2] * n.lambda};
      return n.lambda * n.lambda * Potential(n.base).eval(y);
    }
    case Node::Kind::Pow: {
      double v = Potential(n.base).eval(x);
      return std::pow(std::abs(v), n.p);
    }
    case Node::Kind::Floor: {
      double r = dist(x, {0, 0, 0}, 3);
      double floor = r >= 1.0 ? n.delta / (r * r) : n.delta;  // min(1, r^-2) capped
      return Potential(n.base).eval(x) + floor;
    }
  }
  return 0;
}

std::vector<double> Potential::sample(const Grid& g) const {
  const std::int64_t sp = g.points();
  std::vector<double> out(static_cast<size_t>(sp));
  const double h = g.h();
  // Subsampled midpoint rule on a 9^n offset grid avoids the node itself.
  const int sub = 9;
  for (std::int64_t j = 0; j < sp; ++j) {
    Point x = g.point(j);
    double v = eval(x);
    if (!std::isfinite(v)) {
      double acc = 0;
      int cnt = 0;
      std::array<int, 3> idx{0, 0, 0};
      int total = 1;
      for (int a = 0; a < g.n; ++a) total *= sub;
      for (int t = 0; t < total; ++t) {
        int r = t;
        Point y = x;
        for (int a = 0; a < g.n; ++a) {
          idx[a] = r % sub;
          r /= sub;
          y[a] += (idx[a] + 0.5) / sub * h - h / 2;
        }
        double w = eval(y);
        if (std::isfinite(w)) {
          acc += w;
          ++cnt;
        }
      }
      v = cnt ? acc / cnt : 0;
    }
    out[static_cast<size_t>(j)] = v;
  }
  return out;
}

double Potential::support_radius() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Zero:
      return 0;
    case Node::Kind::Power:
      return n.r1;
    case Node::Kind::Gaussian:
    case Node::Kind::Constant:
      return kInf;
    case Node::Kind::Ball:
      return dist({0, 0, 0}, n.center, 3) + n.radius;
    case Node::Kind::Cube:
      return dist({0, 0, 0}, n.center, 3) + n.side * std::sqrt(3.0) / 2;
    case Node::Kind::Strip:
    case Node::Kind::AxisPower:
      return kInf;
    case Node::Kind::Sum: {
      double r = 0;
      for (const auto& p : n.parts) r = std::max(r, p.support_radius());
      return r;
    }
    case Node::Kind::Sampled:
      return n.grid.L * std::sqrt(3.0);
    case Node::Kind::Scaled:
      return Potential(n.base).support_radius() / n.lambda;
    case Node::Kind::Pow:
      return Potential(n.base).support_radius();
    case Node::Kind::Floor:
      return kInf;
  }
  return kInf;
}

double Potential::origin_exponent() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Power:
      return n.r0 > 0 ? 0 : n.gamma;
    case Node::Kind::Sum: {
      double g = 0;
      for (const auto& p : n.parts) g = std::max(g, p.origin_exponent());
      return g;
    }
    case Node::Kind::Scaled:
      return Potential(n.base).origin_exponent();
    case Node::Kind::Pow:
      return Potential(n.base).origin_exponent() * n.p;
    case Node::Kind::Floor:
      return std::max(2.0, Potential(n.base).origin_exponent());
    default:
      return 0;
  }
}

bool Potential::unbounded_support() const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Power:
      return n.r1 == kInf;
    case Node::Kind::Constant:
    case Node::Kind::Strip:
    case Node::Kind::Floor:
    case Node::Kind::AxisPower:
      return true;
    case Node::Kind::Gaussian:
      return false;  // decays faster than any power
    case Node::Kind::Sum: {
      for (const auto& p : n.parts)
        if (p.unbounded_support()) return true;
      return false;
    }
    case Node::Kind::Scaled:
      return Potential(n.base).unbounded_support();
    case Node::Kind::Pow:
      return Potential(n.base).unbounded_support();
    default:
      return false;
  }
}

bool Potential::lp_divergent(double p, int n_dim) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Node::Kind::Power: {
      // near 0: r^{-gamma p + n - 1} integrable iff gamma p < n
      if (n.r0 == 0 && n.gamma * p >= n_dim) return true;
      if (n.r1 == kInf && n.gamma * p <= n_dim) return true;
      return false;
    }
    case Node::Kind::Constant:
      return n.a > 0;
    case Node::Kind::AxisPower:
      if (n.a == 0) return false;
      if (n_dim > 1) return true;  // constant along the other axes
      return (n.gamma > 0 && n.gamma * p >= 1) || n.gamma * p <= 1;
    case Node::Kind::Strip:
      return n.a > 0 && n_dim > 1;
    case Node::Kind::Sum: {
      for (const auto& q : n.parts)
        if (q.lp_divergent(p, n_dim)) return true;
      return false;
    }
    case Node::Kind::Scaled:
      return Potential(n.base).lp_divergent(p, n_dim);
    case Node::Kind::Pow:
      return Potential(n.base).lp_divergent(p * n.p, n_dim);
    case Node::Kind::Floor:
      // tail delta |x|^{-2p}: diverges iff 2p <= n
      return Potential(n.base).lp_divergent(p, n_dim) || 2 * p <= n_dim;
    default:
      return false;
  }
}

std::string Potential::describe() const {
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
    case Node::Kind::Zero: os << "zero"; break;
    case Node::Kind::Power:
      os << n.a << "*|x|^-" << n.gamma << "[" << n.r0 << "," << n.r1 << ")";
      break;
    case Node::Kind::AxisPower:
      os << n.a << "*|x_" << n.axis << "|^-" << n.gamma;
      break;
    case Node::Kind::Gaussian: os << n.a << "*exp(-|x|^2/" << n.s * n.s << ")"; break;
    case Node::Kind::Ball: os << n.a << "*ball(r=" << n.radius << ")"; break;
    case Node::Kind::Cube: os << n.a << "*cube(side=" << n.side << ")"; break;
    case Node::Kind::Strip: os << n.a << "*strip[" << n.lo << "," << n.hi << ")"; break;
    case Node::Kind::Constant: os << "const " << n.a; break;
    case Node::Kind::Sum:
      os << "sum(";
      for (size_t i = 0; i < n.parts.size(); ++i) os << (i ? "+" : "") << n.parts[i].describe();
      os << ")";
      break;
    case Node::Kind::Sampled: os << "sampled(N=" << n.grid.N << ")"; break;
    case Node::Kind::Scaled:
      os << "scale(" << n.lambda << "," << Potential(n.base).describe() << ")";
      break;
    case Node::Kind::Pow:
      os << "pow(" << n.p << "," << Potential(n.base).describe() << ")";
      break;
    case Node::Kind::Floor:
      os << "floor(" << n.delta << "," << Potential(n.base).describe() << ")";
      break;
  }
  return os.str();
}

}  // namespace wre
