#include "wre/class_norms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "wre/dyadic.hpp"
#include "wre/kernels.hpp"

namespace wre {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::int64_t ipow(int b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::vector<double> abs_samples(const Potential& V, const Grid& g) {
  std::vector<double> s = V.sample(g);
  for (double& x : s) x = std::fabs(x);
  return s;
}

// ---- small raw-FFT layer for the convolution-based functionals ----
// (the field transforms in grid.cpp carry node phases that get in the way
// of plain circular convolution, so these run on bare bins)

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

// DFT of the cell-pair kernel of side-c cubes embedded in a 2c-periodic
// box, zero beyond offsets (-c, c): circular convolution is then exact
// for data supported on [0,c)^n. Cached per (n, beta, c, h).
const std::vector<cplx>& padded_kernel_spectrum(int n, double beta, int c, double h) {
  static std::map<std::tuple<int, double, int, double>, std::vector<cplx>> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto key = std::make_tuple(n, beta, c, h);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  int M = 2 * c;
  std::int64_t total = ipow(M, n);
  std::vector<cplx> k(static_cast<size_t>(total), 0.0);
  for (std::int64_t t = 0; t < total; ++t) {
    std::int64_t r = t;
    std::array<int, 3> d{0, 0, 0};
    bool in_range = true;
    for (int a = n - 1; a >= 0; --a) {
      int idx = static_cast<int>(r % M);
      r /= M;
      int o = idx < c ? idx : idx - M;
      if (std::abs(o) >= c) in_range = false;
      d[a] = std::abs(o);
    }
    if (in_range) k[static_cast<size_t>(t)] = cell_pair_kernel(n, beta, d, h);
  }
  raw_fft(n, M, FFTW_FORWARD, k);
  return cache[key] = std::move(k);
}

// Quadratic form sum_{x,y} a(x) a(y) k_cell(x-y) over a c^n block
// (no h^n factors). Direct pair loop for small blocks, padded FFT beyond.
double cube_pair_form(int n, double beta, double h, int c, const std::vector<double>& a) {
  std::int64_t cells = ipow(c, n);
  if (cells * cells <= 2'000'000) {
    std::vector<double> ktab(static_cast<size_t>(cells));
    std::vector<std::array<int, 3>> coord(static_cast<size_t>(cells));
    for (std::int64_t t = 0; t < cells; ++t) {
      std::int64_t r = t;
      std::array<int, 3> d{0, 0, 0};
      for (int ax = n - 1; ax >= 0; --ax) {
        d[ax] = static_cast<int>(r % c);
        r /= c;
      }
      coord[static_cast<size_t>(t)] = d;
      ktab[static_cast<size_t>(t)] = cell_pair_kernel(n, beta, d, h);
    }
    double diag = 0, off = 0;
    for (std::int64_t i = 0; i < cells; ++i) diag += a[size_t(i)] * a[size_t(i)];
    for (std::int64_t i = 0; i < cells; ++i) {
      if (a[size_t(i)] == 0) continue;
      const auto& ci = coord[size_t(i)];
      for (std::int64_t j = i + 1; j < cells; ++j) {
        if (a[size_t(j)] == 0) continue;
        const auto& cj = coord[size_t(j)];
        std::int64_t offt = 0;
        for (int ax = 0; ax < n; ++ax) offt = offt * c + std::abs(ci[ax] - cj[ax]);
        off += a[size_t(i)] * a[size_t(j)] * ktab[size_t(offt)];
      }
    }
    return diag * ktab[0] + 2.0 * off;
  }
  int M = 2 * c;
  std::int64_t total = ipow(M, n);
  const std::vector<cplx>& khat = padded_kernel_spectrum(n, beta, c, h);
  std::vector<cplx> A(static_cast<size_t>(total), 0.0);
  // embed the c^n block at the low corner of the M^n box
  for (std::int64_t t = 0; t < cells; ++t) {
    std::int64_t r = t, big = 0;
    std::array<int, 3> d{0, 0, 0};
    for (int ax = n - 1; ax >= 0; --ax) {
      d[ax] = static_cast<int>(r % c);
      r /= c;
    }
    for (int ax = 0; ax < n; ++ax) big = big * M + d[ax];
    A[static_cast<size_t>(big)] = a[static_cast<size_t>(t)];
  }
  raw_fft(n, M, FFTW_FORWARD, A);
  for (std::int64_t t = 0; t < total; ++t) A[size_t(t)] *= khat[size_t(t)];
  raw_fft(n, M, FFTW_BACKWARD, A);
  double acc = 0;
  for (std::int64_t t = 0; t < cells; ++t) {
    std::int64_t r = t, big = 0;
    std::array<int, 3> d{0, 0, 0};
    for (int ax = n - 1; ax >= 0; --ax) {
      d[ax] = static_cast<int>(r % c);
      r /= c;
    }
    for (int ax = 0; ax < n; ++ax) big = big * M + d[ax];
    acc += a[static_cast<size_t>(t)] * A[static_cast<size_t>(big)].real();
  }
  return acc / double(total);
}

// U(x) = sum_y f(y) k_cell(x-y) with minimum-image offsets on the full
// periodic grid (exact for data supported in the half box).
std::vector<double> minimage_convolve(const Grid& g, double beta,
                                      const std::vector<double>& f) {
  int N = g.N;
  std::int64_t total = g.points();
  std::vector<cplx> K(static_cast<size_t>(total)), F(static_cast<size_t>(total));
  for (std::int64_t t = 0; t < total; ++t) {
    std::int64_t r = t;
    std::array<int, 3> d{0, 0, 0};
    for (int ax = g.n - 1; ax >= 0; --ax) {
      int idx = static_cast<int>(r % N);
      r /= N;
      int o = idx <= N / 2 ? idx : idx - N;
      d[ax] = std::abs(o);
    }
    K[size_t(t)] = cell_pair_kernel(g.n, beta, d, g.h());
    F[size_t(t)] = f[size_t(t)];
  }
  raw_fft(g.n, N, FFTW_FORWARD, K);
  raw_fft(g.n, N, FFTW_FORWARD, F);
  for (std::int64_t t = 0; t < total; ++t) F[size_t(t)] *= K[size_t(t)];
  raw_fft(g.n, N, FFTW_BACKWARD, F);
  std::vector<double> out(static_cast<size_t>(total));
  for (std::int64_t t = 0; t < total; ++t) out[size_t(t)] = F[size_t(t)].real() / double(total);
  return out;
}

std::string cube_tag(const Grid& g, const Cube& c) {
  std::ostringstream os;
  os << "cube lo=(";
  for (int a = 0; a < g.n; ++a) os << (a ? "," : "") << -g.L + c.lo[a] * g.h();
  os << ") side=" << c.side(g) << (c.shifted ? " shifted" : "");
  return os.str();
}

// Gather the samples covered by a cube into a contiguous c^n block.
std::vector<double> gather_cube(const Grid& g, const std::vector<double>& s, const Cube& q) {
  int c = q.cells;
  std::vector<double> a(static_cast<size_t>(ipow(c, g.n)));
  std::int64_t cnt = ipow(c, g.n);
  for (std::int64_t t = 0; t < cnt; ++t) {
    std::int64_t r = t, flat = 0;
    std::array<int, 3> d{0, 0, 0};
    for (int ax = g.n - 1; ax >= 0; --ax) {
      d[ax] = static_cast<int>(r % c);
      r /= c;
    }
    for (int ax = 0; ax < g.n; ++ax) flat = flat * g.N + (q.lo[ax] + d[ax]);
    a[static_cast<size_t>(t)] = s[static_cast<size_t>(flat)];
  }
  return a;
}

// Divergence verdict from values at successive resolution doublings:
// hard growth (>2x per doubling) or persistent non-decaying increments
// (catches logarithmic divergence, whose ratio test tends to 1).
bool divergence_verdict(const std::vector<double>& t) {
  size_t m = t.size();
  // hard growth must persist across every doubling, or a single coarse
  // grid that merely under-resolved the data would read as divergence
  if (m >= 2) {
    bool all_grow = true;
    for (size_t i = 1; i < m; ++i)
      if (!(t[i - 1] > 0 && t[i] > 2.0 * t[i - 1] * (1 + 1e-6))) all_grow = false;
    if (all_grow) return true;
  }
  if (m >= 3) {
    double d1 = t[m - 2] - t[m - 3], d2 = t[m - 1] - t[m - 2];
    if (d1 > 0 && d2 >= 0.8 * d1 && d2 > 0.05 * t[m - 1]) return true;
  }
  return false;
}

std::vector<Grid> refinement_grids(const Grid& g) {
  std::vector<Grid> out;
  for (int m = g.N / 4; m <= g.N; m *= 2)
    if (m >= 8) out.push_back(Grid(g.n, m, g.L));
  if (out.empty() || out.back().N != g.N) out.push_back(g);
  return out;
}

// ---- scalar cores (value + attained tag), reused for the trend ----

double lebesgue_value(const Potential& V, double p, const Grid& g) {
  std::vector<double> s = abs_samples(V, g);
  double hn = std::pow(g.h(), g.n);
  double acc = 0;
  for (double x : s) acc += std::pow(x, p);
  return std::pow(acc * hn, 1.0 / p);
}

double morrey_value(const Potential& V, double alpha, double p, const Grid& g,
                    std::string* at) {
  std::vector<double> s = V.pointwise_power(p).sample(g);
  SummedTable table(g, s);
  DyadicCubeSet cubes(g, 0, DyadicCubeSet::max_depth(g), true);
  double hn = std::pow(g.h(), g.n);
  double best = 0;
  const Cube* bc = nullptr;
  for (const Cube& q : cubes.cubes()) {
    double vol = q.volume(g);
    double integral = table.cube_sum(q) * hn;
    double val = std::pow(vol, alpha / g.n) * std::pow(integral / vol, 1.0 / p);
    if (val > best) {
      best = val;
      bc = &q;
    }
  }
  if (at && bc) *at = cube_tag(g, *bc);
  return best;
}

double ks_value(const Potential& V, double alpha, const Grid& g, std::string* at,
                double* dyadic_only, double* shift_augmented) {
  std::vector<double> s = abs_samples(V, g);
  SummedTable table(g, s);
  DyadicCubeSet cubes(g, 0, DyadicCubeSet::max_depth(g), true);
  double hn = std::pow(g.h(), g.n);
  double beta = g.n - alpha;
  double best_d = 0, best_s = 0;
  const Cube* bc = nullptr;
  for (const Cube& q : cubes.cubes()) {
    double mass = table.cube_sum(q) * hn;
    if (mass <= 0) continue;
    std::vector<double> a = gather_cube(g, s, q);
    double cross = cube_pair_form(g.n, beta, g.h(), q.cells, a) * hn * hn;
    double ratio = cross / mass;
    if (ratio > best_s) {
      best_s = ratio;
      bc = &q;
    }
    if (!q.shifted && ratio > best_d) best_d = ratio;
  }
  if (at && bc) *at = cube_tag(g, *bc);
  if (dyadic_only) *dyadic_only = best_d;
  if (shift_augmented) *shift_augmented = best_s;
  return best_s;
}

double kato_value(const Potential& V, const Grid& g, std::string* at) {
  std::vector<double> s = abs_samples(V, g);
  double hn = std::pow(g.h(), g.n);
  std::vector<double> U = minimage_convolve(g, 1.0, s);
  double best = 0;
  std::int64_t bi = -1;
  for (std::int64_t t = 0; t < g.points(); ++t) {
    auto x = g.point(t);
    bool inner = true;
    for (int a = 0; a < g.n; ++a)
      if (std::fabs(x[a]) > g.L / 2) inner = false;
    if (!inner) continue;  // keep minimum-image distances exact
    double u = U[size_t(t)] * hn;
    if (u > best) {
      best = u;
      bi = t;
    }
  }
  if (at && bi >= 0) {
    auto x = g.point(bi);
    std::ostringstream os;
    os << "x=(" << x[0] << "," << x[1] << "," << x[2] << ")";
    *at = os.str();
  }
  return best;
}

double rollnik_value(const Potential& V, const Grid& g) {
  std::vector<double> s = abs_samples(V, g);
  double hn = std::pow(g.h(), g.n);
  std::vector<double> U = minimage_convolve(g, 2.0, s);
  double acc = 0;
  for (std::int64_t t = 0; t < g.points(); ++t) acc += s[size_t(t)] * U[size_t(t)];
  return acc * hn * hn;
}

double a2_value(const Potential& w, const Grid& g, std::string* at, bool* vanishing) {
  std::vector<double> ws = w.sample(g);
  std::vector<double> wi = w.pointwise_power(-1.0).sample(g);
  for (std::int64_t t = 0; t < g.points(); ++t) {
    if (ws[size_t(t)] < 0)
      throw std::domain_error("a2_constant: weight must be nonnegative");
    if (wi[size_t(t)] == 0) {  // reciprocal had no finite mass in the cell
      if (vanishing) *vanishing = true;
      return kInf;
    }
  }
  if (vanishing) *vanishing = false;
  SummedTable tw(g, ws), ti(g, wi);
  DyadicCubeSet cubes(g, 0, DyadicCubeSet::max_depth(g), true);
  double best = 0;
  const Cube* bc = nullptr;
  for (const Cube& q : cubes.cubes()) {
    double cnt = double(ipow(q.cells, g.n));
    double val = (tw.cube_sum(q) / cnt) * (ti.cube_sum(q) / cnt);
    if (val > best) {
      best = val;
      bc = &q;
    }
  }
  if (at && bc) *at = cube_tag(g, *bc);
  return best;
}

// All-subinterval 1-D A2 product from two sample sequences (weight and
// its reciprocal). Returns +inf when the reciprocal vanished on a cell.
double line_a2(const std::vector<double>& w, const std::vector<double>& wi) {
  size_t m = w.size();
  if (m == 0) return 0;
  std::vector<double> pw(m + 1, 0), pi(m + 1, 0);
  for (size_t i = 0; i < m; ++i) {
    if (wi[i] == 0) return kInf;
    pw[i + 1] = pw[i] + w[i];
    pi[i + 1] = pi[i] + wi[i];
  }
  double best = 0;
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i; j < m; ++j) {
      double len = double(j - i + 1);
      double v = ((pw[j + 1] - pw[i]) / len) * ((pi[j + 1] - pi[i]) / len);
      if (v > best) best = v;
    }
  return best;
}

int axis_of(const Point& v, int n) {
  for (int a = 0; a < n; ++a) {
    bool others_zero = true;
    for (int b = 0; b < n; ++b)
      if (b != a && std::fabs(v[b]) > 1e-9) others_zero = false;
    if (others_zero && std::fabs(std::fabs(v[a]) - 1.0) < 1e-9) return a;
  }
  return -1;
}

ClassNormResult make_result(std::string cls, double value, std::string at,
                            std::map<std::string, double> params,
                            std::vector<double> trend) {
  ClassNormResult r;
  r.cls = std::move(cls);
  r.value = value;
  r.attained_at = std::move(at);
  r.params = std::move(params);
  r.refinement_trend = std::move(trend);
  return r;
}

}  // namespace

bool ClassNormResult::is_infinite() const { return std::isinf(value); }

nlohmann::json ClassNormResult::to_json() const {
  nlohmann::json j;
  j["class"] = cls;
  if (std::isinf(value))
    j["value"] = "inf";
  else
    j["value"] = value;
  j["attained_at"] = attained_at;
  j["params"] = params;
  j["refinement_trend"] = refinement_trend;
  return j;
}

ClassNormResult lebesgue_norm(const Potential& V, double p, const Grid& g) {
  if (!(p >= 1) || !std::isfinite(p))
    throw std::invalid_argument("lebesgue_norm: need finite p >= 1");
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g)) trend.push_back(lebesgue_value(V, p, gg));
  bool divergent = V.lp_divergent(p, g.n) || divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("lebesgue", value,
                     divergent ? "analytic divergence" : "",
                     {{"p", p}, {"N", double(g.N)}, {"L", g.L}}, std::move(trend));
}

ClassNormResult weak_norm(const Potential& V, double p, const Grid& g) {
  if (!(p >= 1) || !std::isfinite(p))
    throw std::invalid_argument("weak_norm: need finite p >= 1");
  std::vector<double> s = abs_samples(V, g);
  double hn = std::pow(g.h(), g.n);
  double vmax = 0, vmin = kInf;
  for (double x : s) {
    vmax = std::max(vmax, x);
    if (x > 0) vmin = std::min(vmin, x);
  }
  if (vmax == 0)
    return make_result("weak-lebesgue", 0, "", {{"p", p}, {"N", double(g.N)}}, {});
  // Levels whose set holds fewer cells than the cutoff are below the
  // counting resolution; their quantized measure (at least one full cell)
  // would bias the sup upward, so they only count when nothing resolves.
  const int levels = 64;
  const std::int64_t cutoff = 30;
  double best = 0, best_l = vmin, best_any = 0, best_any_l = vmin;
  std::int64_t unresolved = 0;
  for (int k = 0; k < levels; ++k) {
    double lam = vmin * std::pow(vmax / vmin, levels == 1 ? 0 : double(k) / (levels - 1));
    std::int64_t cnt = 0;
    for (double x : s)
      if (x >= lam * (1 - 1e-12)) ++cnt;
    double val = lam * std::pow(double(cnt) * hn, 1.0 / p);
    if (cnt >= cutoff && val > best) {
      best = val;
      best_l = lam;
    }
    if (cnt < cutoff) ++unresolved;
    if (val > best_any) {
      best_any = val;
      best_any_l = lam;
    }
  }
  if (best == 0) {
    best = best_any;
    best_l = best_any_l;
  }
  std::ostringstream os;
  os << "level=" << best_l;
  return make_result("weak-lebesgue", best, os.str(),
                     {{"p", p},
                      {"N", double(g.N)},
                      {"levels", double(levels)},
                      {"unresolved_levels", double(unresolved)}},
                     {});
}

ClassNormResult morrey_campanato_norm(const Potential& V, double alpha, double p,
                                      const Grid& g) {
  if (!(alpha > 0)) throw std::invalid_argument("morrey_campanato_norm: need alpha > 0");
  if (!(p >= 1) || p > g.n / alpha + 1e-12)
    throw std::invalid_argument("morrey_campanato_norm: need 1 <= p <= n/alpha");
  double g0 = V.origin_exponent();
  bool divergent = g0 > 0 && g0 * p >= g.n;
  std::string at;
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g))
    trend.push_back(morrey_value(V, alpha, p, gg, gg.N == g.N ? &at : nullptr));
  divergent = divergent || divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("morrey-campanato", value,
                     divergent ? "analytic divergence" : at,
                     {{"alpha", alpha}, {"p", p}, {"N", double(g.N)}}, std::move(trend));
}

ClassNormResult kerman_sawyer_norm(const Potential& V, double alpha, const Grid& g) {
  if (!(alpha > 0) || !(alpha < g.n))
    throw std::invalid_argument("kerman_sawyer_norm: need alpha in (0, n)");
  std::string at;
  double dy = 0, sh = 0;
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g)) {
    if (gg.N == g.N)
      trend.push_back(ks_value(V, alpha, gg, &at, &dy, &sh));
    else
      trend.push_back(ks_value(V, alpha, gg, nullptr, nullptr, nullptr));
  }
  bool divergent = divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("kerman-sawyer", value, at,
                     {{"alpha", alpha},
                      {"N", double(g.N)},
                      {"dyadic_only", dy},
                      {"shift_augmented", sh}},
                     std::move(trend));
}

ClassNormResult sn_bracket(const Potential& V, const Grid& g) {
  if (g.n < 3) throw std::invalid_argument("sn_bracket: defined for n >= 3");
  Potential W = V.pointwise_power((g.n - 1) / 2.0);
  ClassNormResult ks = kerman_sawyer_norm(W, g.n - 1.0, g);
  double e = 2.0 / (g.n - 1);
  ClassNormResult r = ks;
  r.cls = "sn-bracket";
  r.value = std::isinf(ks.value) ? kInf : std::pow(ks.value, e);
  for (double& t : r.refinement_trend) t = std::pow(t, e);
  r.params["exponent"] = e;
  return r;
}

ClassNormResult kato_norm(const Potential& V, const Grid& g) {
  if (g.n != 3) throw std::invalid_argument("kato_norm: defined for n = 3");
  std::string at;
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g))
    trend.push_back(kato_value(V, gg, gg.N == g.N ? &at : nullptr));
  bool divergent = divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("kato", value, at,
                     {{"N", double(g.N)}, {"L", g.L}}, std::move(trend));
}

ClassNormResult rollnik_norm(const Potential& V, const Grid& g) {
  if (g.n != 3) throw std::invalid_argument("rollnik_norm: defined for n = 3");
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g)) trend.push_back(rollnik_value(V, gg));
  bool divergent = divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("rollnik", value, "",
                     {{"N", double(g.N)}, {"L", g.L}}, std::move(trend));
}

ClassNormResult a2_constant(const Potential& w, const Grid& g) {
  std::string at;
  bool vanishing = false;
  std::vector<double> trend;
  for (const Grid& gg : refinement_grids(g))
    trend.push_back(a2_value(w, gg, gg.N == g.N ? &at : nullptr, &vanishing));
  bool divergent = vanishing || std::isinf(trend.back()) || divergence_verdict(trend);
  double value = divergent ? kInf : trend.back();
  return make_result("a2", value,
                     vanishing ? "weight vanishes on a cell" : at,
                     {{"N", double(g.N)}, {"L", g.L}}, std::move(trend));
}

ClassNormResult a2_directional(const Potential& w, const Point& v, const Grid& g) {
  double vn = 0;
  for (int a = 0; a < g.n; ++a) vn += v[a] * v[a];
  if (std::fabs(std::sqrt(vn) - 1.0) > 1e-9)
    throw std::invalid_argument("a2_directional: direction must be a unit vector");
  int axis = axis_of(v, g.n);
  double best = 0;
  std::int64_t best_line = -1;
  if (axis >= 0) {
    std::vector<double> ws = w.sample(g);
    std::vector<double> wi = w.pointwise_power(-1.0).sample(g);
    std::int64_t stride = ipow(g.N, g.n - 1 - axis);
    std::int64_t total = g.points();
    std::vector<double> lw(g.N), li(g.N);
    for (std::int64_t base = 0; base < total; ++base) {
      // base must sit at line start: index along the axis == 0
      if ((base / stride) % g.N != 0) continue;
      for (int i = 0; i < g.N; ++i) {
        lw[size_t(i)] = ws[size_t(base + i * stride)];
        li[size_t(i)] = wi[size_t(base + i * stride)];
      }
      double val = line_a2(lw, li);
      if (val > best) {
        best = val;
        best_line = base;
      }
      if (std::isinf(best)) break;
    }
  } else {
    // general direction: sample rotated lines pointwise through a subset
    // of grid points; non-finite values take the neighbor average
    Potential winv = w.pointwise_power(-1.0);
    int stride = 1;
    while (ipow(g.N / stride, g.n) > 4096) stride *= 2;
    std::int64_t total = g.points();
    for (std::int64_t t = 0; t < total; ++t) {
      std::int64_t r = t;
      bool keep = true;
      for (int a = g.n - 1; a >= 0; --a) {
        int idx = static_cast<int>(r % g.N);
        r /= g.N;
        if (idx % stride != 0) keep = false;
      }
      if (!keep) continue;
      auto x0 = g.point(t);
      std::vector<double> lw, li;
      for (int k = -g.N; k <= g.N; ++k) {
        Point x{0, 0, 0};
        bool inside = true;
        for (int a = 0; a < g.n; ++a) {
          x[a] = x0[a] + k * g.h() * v[a];
          if (std::fabs(x[a]) > g.L) inside = false;
        }
        if (!inside) {
          if (!lw.empty()) break;  // keep one contiguous in-box run
          continue;
        }
        lw.push_back(w.eval(x));
        li.push_back(winv.eval(x));
      }
      auto patch = [](std::vector<double>& f) {
        for (size_t i = 0; i < f.size(); ++i) {
          if (std::isfinite(f[i])) continue;
          double lo = 0, hi = 0;
          bool has_lo = false, has_hi = false;
          for (size_t j = i; j-- > 0;)
            if (std::isfinite(f[j])) {
              lo = f[j];
              has_lo = true;
              break;
            }
          for (size_t j = i + 1; j < f.size(); ++j)
            if (std::isfinite(f[j])) {
              hi = f[j];
              has_hi = true;
              break;
            }
          f[i] = has_lo && has_hi ? 0.5 * (lo + hi) : (has_lo ? lo : hi);
        }
      };
      patch(lw);
      patch(li);
      double val = line_a2(lw, li);
      if (val > best) {
        best = val;
        best_line = t;
      }
    }
  }
  std::ostringstream os;
  os << "line base index " << best_line;
  return make_result("a2-directional", best, os.str(),
                     {{"N", double(g.N)}, {"axis", double(axis)}}, {});
}

Potential directional_maximal(const Potential& V, double beta, const Point& v,
                              const Grid& g) {
  if (!(beta > 1)) throw std::invalid_argument("directional_maximal: need beta > 1");
  int axis = axis_of(v, g.n);
  if (axis < 0)
    throw std::invalid_argument("directional_maximal: direction must be axis-aligned");
  std::vector<double> f = V.pointwise_power(beta).sample(g);
  std::vector<double> out(f.size());
  std::int64_t stride = ipow(g.N, g.n - 1 - axis);
  std::int64_t total = g.points();
  std::vector<double> pre(g.N + 1);
  for (std::int64_t base = 0; base < total; ++base) {
    if ((base / stride) % g.N != 0) continue;
    pre[0] = 0;
    for (int i = 0; i < g.N; ++i)
      pre[size_t(i + 1)] = pre[size_t(i)] + f[size_t(base + i * stride)];
    for (int i = 0; i < g.N; ++i) {
      double best = 0;
      for (int mu = 0; mu < g.N; ++mu) {
        int lo = std::max(0, i - mu), hi = std::min(g.N - 1, i + mu);
        double avg = (pre[size_t(hi + 1)] - pre[size_t(lo)]) / double(hi - lo + 1);
        if (avg > best) best = avg;
        if (lo == 0 && hi == g.N - 1) break;
      }
      out[size_t(base + i * stride)] = std::pow(best, 1.0 / beta);
    }
  }
  return Potential::sampled(g, std::move(out));
}

}  // namespace wre
