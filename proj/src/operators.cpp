#include "wre/operators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "wre/kernels.hpp"

namespace wre {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::int64_t ipow(int b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// |xi_k|^2 for every spatial bin, flat row-major order.
std::vector<double> xi_squared(const Grid& g) {
  const std::int64_t sp = g.points();
  std::vector<double> out(static_cast<size_t>(sp));
  for (std::int64_t j = 0; j < sp; ++j) {
    std::int64_t r = j;
    double s = 0;
    for (int a = g.n - 1; a >= 0; --a) {
      double xi = g.freq(static_cast<int>(r % g.N));
      s += xi * xi;
      r /= g.N;
    }
    out[static_cast<size_t>(j)] = s;
  }
  return out;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton on the recurrence.
void gauss_legendre(int P, std::vector<double>& x, std::vector<double>& w) {
  x.assign(P, 0.0);
  w.assign(P, 0.0);
  for (int i = 0; i < (P + 1) / 2; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (P + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= P; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = P * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::fabs(dt) < 1e-15) break;
    }
    x[P - 1 - i] = t;
    x[i] = -t;
    w[i] = w[P - 1 - i] = 2.0 / ((1 - t * t) * dp * dp);
  }
}

void require_spatial(const Field& f, const char* who) {
  if (f.has_time())
    throw std::invalid_argument(std::string(who) + ": expects a space-only field");
}

// Phase tables e^{i sgn x_i xi_a} per axis for one quadrature node: the
// node sums then use three lookups per grid point instead of an exp.
struct PhaseTables {
  std::vector<cplx> t[3];
  PhaseTables(const Grid& g, const std::array<double, 3>& xi, double sgn) {
    for (int a = 0; a < g.n; ++a) {
      t[a].resize(static_cast<size_t>(g.N));
      for (int i = 0; i < g.N; ++i) {
        double ph = sgn * g.coord(i) * xi[a];
        t[a][static_cast<size_t>(i)] = cplx(std::cos(ph), std::sin(ph));
      }
    }
  }
};

// ---- raw FFT on bare bins (no node phases) for circular convolution ----

std::mutex fft_mutex;

fftw_plan raw_plan(int n, int M, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  static std::vector<fftw_complex*> scratch;
  std::lock_guard<std::mutex> lock(fft_mutex);
  auto key = std::make_tuple(n, M, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  std::int64_t total = ipow(M, n);
  fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(total));
  scratch.push_back(buf);
  int dims[3] = {M, M, M};
  fftw_plan p = fftw_plan_dft(n, dims, buf, buf, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans[key] = p;
  return p;
}

void raw_fft(int n, int M, int sign, std::vector<cplx>& a) {
  fftw_plan p = raw_plan(n, M, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(a.data()),
                   reinterpret_cast<fftw_complex*>(a.data()));
}

// Spectrum of the cell-corrected |x|^{-beta} kernel under the minimum
// image convention, cached per grid geometry.
const std::vector<cplx>& riesz_kernel_spectrum(const Grid& g, double beta) {
  static std::map<std::tuple<int, int, double, double>, std::vector<cplx>> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_tuple(g.n, g.N, g.L, beta);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::int64_t sp = g.points();
  std::vector<cplx> K(static_cast<size_t>(sp));
  std::array<int, 3> d{0, 0, 0};
  for (std::int64_t j = 0; j < sp; ++j) {
    std::int64_t r = j;
    for (int a = g.n - 1; a >= 0; --a) {
      int o = static_cast<int>(r % g.N);
      d[a] = (o <= g.N / 2) ? o : o - g.N;
      r /= g.N;
    }
    K[static_cast<size_t>(j)] = cell_pair_kernel(g.n, beta, d, g.h());
  }
  raw_fft(g.n, g.N, FFTW_FORWARD, K);
  return cache.emplace(key, std::move(K)).first->second;
}

}  // namespace

// ---- spectral parameter ----

SpectralParameter SpectralParameter::interior(cplx z) {
  if (z.imag() == 0.0)
    throw std::invalid_argument("SpectralParameter: interior point must have Im z != 0");
  SpectralParameter p;
  p.kind = Kind::interior;
  p.z = z;
  return p;
}

SpectralParameter SpectralParameter::boundary(double lambda, int sign,
                                              std::vector<double> eps) {
  if (lambda <= 0) throw std::invalid_argument("SpectralParameter: lambda must be > 0");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("SpectralParameter: sign must be +-1");
  for (size_t j = 0; j < eps.size(); ++j) {
    if (eps[j] <= 0 || (j > 0 && eps[j] >= eps[j - 1]))
      throw std::invalid_argument("SpectralParameter: eps_j must decrease strictly to 0");
  }
  SpectralParameter p;
  p.kind = Kind::boundary;
  p.lambda = lambda;
  p.sign = sign;
  p.eps = std::move(eps);
  return p;
}

// ---- sphere quadrature ----

SphereQuadrature SphereQuadrature::build(int n, double r, int order) {
  if (n != 2 && n != 3) throw std::invalid_argument("SphereQuadrature: n must be 2 or 3");
  if (r <= 0) throw std::invalid_argument("SphereQuadrature: radius must be > 0");
  SphereQuadrature q;
  q.n = n;
  q.r = r;
  if (n == 2) {
    int M = std::max(4, order);
    if (M % 2) ++M;  // keep the node set symmetric under xi -> -xi
    q.degree = M - 1;
    for (int j = 0; j < M; ++j) {
      double ph = 2 * kPi * j / M;
      q.nodes.push_back({r * std::cos(ph), r * std::sin(ph), 0.0});
      q.weights.push_back(2 * kPi * r / M);
    }
  } else {
    int P = std::max(2, order);
    int M = 2 * P;
    q.degree = 2 * P - 1;
    std::vector<double> u, wu;
    gauss_legendre(P, u, wu);
    for (int i = 0; i < P; ++i) {
      double st = std::sqrt(std::max(0.0, 1 - u[i] * u[i]));
      for (int j = 0; j < M; ++j) {
        double ph = 2 * kPi * j / M;
        q.nodes.push_back({r * st * std::cos(ph), r * st * std::sin(ph), r * u[i]});
        q.weights.push_back(r * r * wu[i] * 2 * kPi / M);
      }
    }
  }
  return q;
}

SphereQuadrature SphereQuadrature::for_grid(const Grid& g, double r) {
  // plane waves e^{ix.xi} over the box need harmonic content up to
  // degree ~ r |x|_max; pad for the superalgebraic tail.
  double D = r * std::sqrt(static_cast<double>(g.n)) * g.L;
  if (g.n == 2) return build(2, r, std::max(32, static_cast<int>(std::ceil(D)) + 16));
  return build(3, r, std::max(12, static_cast<int>(std::ceil(0.6 * D)) + 10));
}

double SphereQuadrature::total_weight() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

// ---- resolvent multipliers ----

Field free_resolvent(const Field& f, cplx z) {
  if (z.imag() == 0.0)
    throw std::invalid_argument(
        "free_resolvent: z on the real axis; use boundary_resolvent for lambda +- i0");
  MultiplierSpec m;
  m.name = "free_resolvent";
  m.symbol = [z](const std::array<double, 3>& xi, double) {
    double x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return 1.0 / (x2 - z);
  };
  return apply_multiplier(f, m);
}

Field power_resolvent(const Field& f, cplx lambda, cplx z) {
  if (z.imag() == 0.0)
    throw std::invalid_argument("power_resolvent: Im z must be nonzero");
  MultiplierSpec m;
  m.name = "power_resolvent";
  m.symbol = [lambda, z](const std::array<double, 3>& xi, double) {
    double x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::exp(-lambda * std::log(x2 - z));  // principal branch
  };
  return apply_multiplier(f, m);
}

// ---- sphere restriction / extension / convolution ----

std::vector<cplx> sphere_restrict(const Field& f, const SphereQuadrature& q) {
  require_spatial(f, "sphere_restrict");
  const Grid& g = f.grid();
  const std::int64_t sp = g.points();
  double c = std::pow(g.h(), g.n) * std::pow(2 * kPi, -0.5 * g.n);
  std::vector<cplx> out(q.nodes.size());
  for (size_t jn = 0; jn < q.nodes.size(); ++jn) {
    PhaseTables pt(g, q.nodes[jn], +1.0);
    cplx acc = 0;
    for (std::int64_t j = 0; j < sp; ++j) {
      std::int64_t r = j;
      cplx ph = 1.0;
      for (int a = g.n - 1; a >= 0; --a) {
        ph *= pt.t[a][static_cast<size_t>(r % g.N)];
        r /= g.N;
      }
      acc += f[j] * ph;
    }
    out[jn] = c * acc;
  }
  return out;
}

Field sphere_extension(const std::vector<cplx>& gvals, const SphereQuadrature& q,
                       const Grid& grid) {
  if (gvals.size() != q.nodes.size())
    throw std::invalid_argument("sphere_extension: sample count mismatch");
  Field out(grid);
  const std::int64_t sp = grid.points();
  for (size_t jn = 0; jn < q.nodes.size(); ++jn) {
    cplx wg = q.weights[jn] * gvals[jn];
    if (wg == 0.0) continue;
    PhaseTables pt(grid, q.nodes[jn], -1.0);
    for (std::int64_t j = 0; j < sp; ++j) {
      std::int64_t r = j;
      cplx ph = 1.0;
      for (int a = grid.n - 1; a >= 0; --a) {
        ph *= pt.t[a][static_cast<size_t>(r % grid.N)];
        r /= grid.N;
      }
      out[j] += wg * ph;
    }
  }
  return out;
}

Field sphere_convolution(const Field& f, const SphereQuadrature& q) {
  std::vector<cplx> samples = sphere_restrict(f, q);
  Field out = sphere_extension(samples, q, f.grid());
  out *= std::pow(2 * kPi, -0.5 * f.grid().n);
  return out;
}

// ---- boundary resolvent ----

BoundaryResolvent boundary_resolvent(const Field& f, double lambda, int sign,
                                     double shell_scale) {
  require_spatial(f, "boundary_resolvent");
  const Grid& g = f.grid();
  if (lambda <= 0) throw std::invalid_argument("boundary_resolvent: lambda must be > 0");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("boundary_resolvent: sign must be +-1");
  double r = std::sqrt(lambda);
  if (r < 4 * g.dxi() || r > 0.5 * g.nyquist()) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "boundary_resolvent: sqrt(lambda)=%g outside the resolvable band [%g, %g]",
                  r, 4 * g.dxi(), 0.5 * g.nyquist());
    throw std::domain_error(buf);
  }
  // local symbol spacing: mean gap between the distinct values of |xi_k|^2
  // within one radial frequency step of the shell (the radial step itself
  // vastly overstates the spacing once many lattice directions contribute)
  double W = 2 * r * g.dxi() + g.dxi() * g.dxi();
  std::vector<double> near;
  {
    std::vector<double> x2 = xi_squared(g);
    for (double s : x2)
      if (std::fabs(s - lambda) < W) near.push_back(s);
    std::sort(near.begin(), near.end());
    near.erase(std::unique(near.begin(), near.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-9; }),
               near.end());
  }
  double gap = near.size() >= 3 ? (near.back() - near.front()) / (near.size() - 1)
                                : g.dxi() * g.dxi();
  double kappa0 = std::min(shell_scale * gap, 0.5 * lambda);
  MultiplierSpec m;
  m.name = "pv_resolvent";
  m.symbol = [lambda, kappa0](const std::array<double, 3>& xi, double) -> cplx {
    double s = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] - lambda;
    // odd interpolant through the excluded shell: symmetric pairs cancel
    // to first order, matching the principal value
    if (std::fabs(s) < kappa0) return s / (kappa0 * kappa0);
    return 1.0 / s;
  };
  BoundaryResolvent out;
  out.shell_width = kappa0;
  out.principal = apply_multiplier(f, m);
  SphereQuadrature q = SphereQuadrature::for_grid(g, r);
  out.singular = sphere_convolution(f, q);
  out.singular *= cplx(0.0, sign * kPi / (2 * r));
  out.total = out.principal + out.singular;
  return out;
}

// ---- fractional integral ----

Field fractional_integral(const Field& f, double alpha) {
  const Grid& g = f.grid();
  if (alpha <= 0 || alpha >= g.n)
    throw std::invalid_argument("fractional_integral: alpha must lie in (0, n)");
  const std::vector<cplx>& Khat = riesz_kernel_spectrum(g, g.n - alpha);
  const std::int64_t sp = g.points();
  double scale = std::pow(g.h(), g.n) / static_cast<double>(sp);
  Field out(f);
  for (int it = 0; it < f.time_size(); ++it) {
    std::vector<cplx> a(f.data().begin() + out.slice_offset(it),
                        f.data().begin() + out.slice_offset(it) + sp);
    raw_fft(g.n, g.N, FFTW_FORWARD, a);
    for (std::int64_t j = 0; j < sp; ++j) a[static_cast<size_t>(j)] *= Khat[static_cast<size_t>(j)];
    raw_fft(g.n, g.N, FFTW_BACKWARD, a);
    for (std::int64_t j = 0; j < sp; ++j)
      out[out.slice_offset(it) + j] = scale * a[static_cast<size_t>(j)];
  }
  return out;
}

// ---- power resolvent kernel ----

cplx power_resolvent_kernel(int n, cplx lambda, cplx z, double absx) {
  if (absx <= 0) throw std::domain_error("power_resolvent_kernel: |x| must be > 0");
  if (z.imag() == 0.0)
    throw std::invalid_argument("power_resolvent_kernel: Im z must be nonzero");
  if (lambda.real() <= 0 || lambda.real() >= 0.5 * n)
    throw std::invalid_argument("power_resolvent_kernel: Re lambda must lie in (0, n/2)");
  cplx nu = 0.5 * n - lambda;
  cplx w = std::sqrt(z) * absx;  // Re w > 0 off the principal cut
  cplx logpref = lambda * lambda + (1.0 - lambda) * std::log(2.0) -
                 0.5 * n * std::log(2 * kPi) - log_gamma(lambda) - log_gamma(nu) +
                 0.5 * nu * (std::log(z) - 2.0 * std::log(absx));
  return std::exp(logpref) * bessel_k(nu, w);
}

// ---- analytic family T_lambda ----

Field t_lambda(const Field& f, cplx lambda, cplx z, const Potential& V) {
  const Grid& g = f.grid();
  if (lambda.real() < 0)
    throw std::invalid_argument("t_lambda: Re lambda must be >= 0");
  if (lambda.real() > 0.5 * (g.n - 1) + 1e-12)
    throw std::invalid_argument("t_lambda: Re lambda must be <= (n-1)/2");
  if (lambda == 0.0) return f;
  std::vector<double> v = V.sample(g);
  const std::int64_t sp = g.points();
  std::vector<cplx> wgt(static_cast<size_t>(sp));
  for (std::int64_t j = 0; j < sp; ++j) {
    double a = std::fabs(v[static_cast<size_t>(j)]);
    wgt[static_cast<size_t>(j)] =
        (a > 0) ? std::exp(0.5 * lambda * std::log(a)) : cplx(0.0);
  }
  Field u(f);
  for (int it = 0; it < f.time_size(); ++it)
    for (std::int64_t j = 0; j < sp; ++j)
      u[u.slice_offset(it) + j] *= wgt[static_cast<size_t>(j)];
  u = power_resolvent(u, lambda, z);
  for (int it = 0; it < f.time_size(); ++it)
    for (std::int64_t j = 0; j < sp; ++j)
      u[u.slice_offset(it) + j] *= wgt[static_cast<size_t>(j)];
  return u;
}

// ---- propagator and Duhamel integrals ----

Field propagator(const Field& f, double t) {
  MultiplierSpec m;
  m.name = "propagator";
  m.symbol = [t](const std::array<double, 3>& xi, double) {
    double x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    return std::exp(cplx(0.0, -t * x2));
  };
  return apply_multiplier(f, m);
}

Field duhamel_full(const Field& F) {
  if (!F.has_time()) throw std::invalid_argument("duhamel_full: needs a space-time field");
  const Grid& g = F.grid();
  const TimeAxis& ta = *F.time();
  Field G = dft_forward_spatial(F);
  std::vector<double> x2 = xi_squared(g);
  const std::int64_t sp = g.points();
  std::vector<cplx> A(static_cast<size_t>(sp), 0.0);
  for (int m = 0; m < ta.Nt; ++m) {
    double t = ta.node(m);
    for (std::int64_t j = 0; j < sp; ++j)
      A[static_cast<size_t>(j)] +=
          std::exp(cplx(0.0, t * x2[static_cast<size_t>(j)])) * G[G.slice_offset(m) + j];
  }
  Field out(g, ta);
  for (int m = 0; m < ta.Nt; ++m) {
    double t = ta.node(m);
    for (std::int64_t j = 0; j < sp; ++j)
      out[out.slice_offset(m) + j] =
          ta.dt() * std::exp(cplx(0.0, -t * x2[static_cast<size_t>(j)])) * A[static_cast<size_t>(j)];
  }
  return dft_inverse_spatial(out);
}

Field duhamel_retarded(const Field& F) {
  if (!F.has_time())
    throw std::invalid_argument("duhamel_retarded: needs a space-time field");
  const Grid& g = F.grid();
  const TimeAxis& ta = *F.time();
  Field G = dft_forward_spatial(F);
  std::vector<double> x2 = xi_squared(g);
  const std::int64_t sp = g.points();
  // cumulative trapezoid of e^{is|xi|^2} Fhat from the window start
  std::vector<cplx> B(static_cast<size_t>(sp), 0.0);
  std::vector<cplx> gprev(static_cast<size_t>(sp));
  Field out(g, ta);
  for (int m = 0; m < ta.Nt; ++m) {
    double t = ta.node(m);
    for (std::int64_t j = 0; j < sp; ++j) {
      cplx gm = std::exp(cplx(0.0, t * x2[static_cast<size_t>(j)])) * G[G.slice_offset(m) + j];
      if (m > 0) B[static_cast<size_t>(j)] += 0.5 * ta.dt() * (gprev[static_cast<size_t>(j)] + gm);
      gprev[static_cast<size_t>(j)] = gm;
      out[out.slice_offset(m) + j] =
          std::exp(cplx(0.0, -t * x2[static_cast<size_t>(j)])) * B[static_cast<size_t>(j)];
    }
  }
  return dft_inverse_spatial(out);
}

Field duhamel_retarded_adjoint(const Field& F) {
  if (!F.has_time())
    throw std::invalid_argument("duhamel_retarded_adjoint: needs a space-time field");
  const Grid& g = F.grid();
  const TimeAxis& ta = *F.time();
  Field G = dft_forward_spatial(F);
  std::vector<double> x2 = xi_squared(g);
  const std::int64_t sp = g.points();
  // transpose of the cumulative trapezoid: reverse partial sums of
  // phi_m = e^{-i t_m |xi|^2} Fhat_m, with the row-0 / diagonal weights
  // of the forward stencil transposed exactly
  Field out(g, ta);
  std::vector<cplx> S(static_cast<size_t>(sp), 0.0);
  for (int s = ta.Nt - 1; s >= 0; --s) {
    double t = ta.node(s);
    for (std::int64_t j = 0; j < sp; ++j) {
      double s2 = x2[static_cast<size_t>(j)];
      cplx phi = std::exp(cplx(0.0, t * s2)) * G[G.slice_offset(s) + j];
      cplx acc = (s > 0) ? ta.dt() * (0.5 * phi + S[static_cast<size_t>(j)])
                         : 0.5 * ta.dt() * S[static_cast<size_t>(j)];
      out[out.slice_offset(s) + j] = std::exp(cplx(0.0, -t * s2)) * acc;
      S[static_cast<size_t>(j)] += phi;
    }
  }
  return dft_inverse_spatial(out);
}

double duhamel_error_estimate(const Field& F) {
  if (!F.has_time()) throw std::invalid_argument("duhamel_error_estimate: needs time axis");
  const Grid& g = F.grid();
  const TimeAxis& ta = *F.time();
  Field G = dft_forward_spatial(F);
  std::vector<double> x2 = xi_squared(g);
  const std::int64_t sp = g.points();
  double acc = 0;
  for (int m = 1; m + 1 < ta.Nt; ++m) {
    for (std::int64_t j = 0; j < sp; ++j) {
      double s2 = x2[static_cast<size_t>(j)];
      cplx a = std::exp(cplx(0.0, ta.node(m - 1) * s2)) * G[G.slice_offset(m - 1) + j];
      cplx b = std::exp(cplx(0.0, ta.node(m) * s2)) * G[G.slice_offset(m) + j];
      cplx c = std::exp(cplx(0.0, ta.node(m + 1) * s2)) * G[G.slice_offset(m + 1) + j];
      acc += std::norm(a - 2.0 * b + c);
    }
  }
  double hn = std::pow(g.h(), g.n);
  // (dt^2/12) * L2(t,x) norm of the estimated second time derivative,
  // times the window length as the integration measure
  double d2 = std::sqrt(acc * hn * ta.dt()) / (ta.dt() * ta.dt());
  return ta.dt() * ta.dt() / 12.0 * d2 * (ta.t1 - ta.t0);
}

// ---- space-time multipliers ----

SpaceTimeSymbol SpaceTimeSymbol::full() {
  SpaceTimeSymbol s;
  s.kind = Kind::full;
  return s;
}

SpaceTimeSymbol SpaceTimeSymbol::regularized(double eps) {
  if (eps == 0) throw std::invalid_argument("SpaceTimeSymbol: eps must be nonzero");
  SpaceTimeSymbol s;
  s.kind = Kind::regularized;
  s.eps = eps;
  return s;
}

SpaceTimeSymbol SpaceTimeSymbol::band(int k, double rho) {
  if (rho <= 0) throw std::invalid_argument("SpaceTimeSymbol: rho must be > 0");
  SpaceTimeSymbol s;
  s.kind = Kind::band;
  s.k = k;
  s.rho = rho;
  return s;
}

cplx SpaceTimeSymbol::value(const std::array<double, 3>& xi, double tau, int n) const {
  double x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  double xn = xi[n - 1];
  switch (kind) {
    case Kind::full:
      return 1.0 / (tau + x2 + cplx(0.0, xn));
    case Kind::regularized:
      return 1.0 / (tau + x2 + cplx(0.0, eps));
    case Kind::band: {
      double tk = std::ldexp(1.0, -k);
      return (tk - xn) / (cplx(rho, xn) * cplx(rho, tk));
    }
  }
  return 0.0;
}

Field spacetime_multiplier(const Field& f, const SpaceTimeSymbol& s) {
  if (!f.has_time())
    throw std::invalid_argument("spacetime_multiplier: needs a space-time field");
  const Grid& g = f.grid();
  Field hat = dft_forward(f);
  double peak = 0;
  for (std::int64_t j = 0; j < hat.size(); ++j) peak = std::max(peak, std::abs(hat[j]));
  const std::int64_t sp = g.points();
  std::array<double, 3> xi{0, 0, 0};
  for (int it = 0; it < f.time_size(); ++it) {
    double tau = f.time()->freq(it);
    for (std::int64_t j = 0; j < sp; ++j) {
      std::int64_t r = j;
      for (int a = g.n - 1; a >= 0; --a) {
        xi[a] = g.freq(static_cast<int>(r % g.N));
        r /= g.N;
      }
      cplx v = s.value(xi, tau, g.n);
      std::int64_t idx = hat.slice_offset(it) + j;
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        // an exact zero of the symbol is tolerable only on frequencies the
        // data does not carry
        if (std::abs(hat[idx]) <= 1e-12 * peak) {
          hat[idx] = 0;
          continue;
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "spacetime_multiplier: symbol vanishes at xi=(%g,%g,%g), tau=%g;"
                      " shift the energy or regularize",
                      xi[0], xi[1], xi[2], tau);
        throw std::domain_error(buf);
      }
      hat[idx] *= v;
    }
  }
  return dft_inverse(hat);
}

}  // namespace wre
