#include "wre/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace wre {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 8-point Gauss-Legendre on [-1,1].
const double kG8x[8] = {-0.9602898564975362, -0.7966664774136267, -0.5255324099163290,
                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                        0.7966664774136267,  0.9602898564975362};
const double kG8w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                        0.2223810344533745, 0.1012285362903763};

// 3-point Gauss-Legendre on [0,1].
const double kG3x[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
const double kG3w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

// Integral of f over an axis-aligned box, 8-pt Gauss product.
template <class F>
double gauss_box(int n, const double* lo, const double* hi, F&& f) {
  double mid[3], half[3];
  for (int a = 0; a < n; ++a) {
    mid[a] = 0.5 * (lo[a] + hi[a]);
    half[a] = 0.5 * (hi[a] - lo[a]);
  }
  int total = 1;
  for (int a = 0; a < n; ++a) total *= 8;
  double s = 0;
  for (int t = 0; t < total; ++t) {
    int r = t;
    double w[3] = {0, 0, 0}, wt = 1;
    for (int a = 0; a < n; ++a) {
      int i = r % 8;
      r /= 8;
      w[a] = mid[a] + half[a] * kG8x[i];
      wt *= kG8w[i] * half[a];
    }
    s += wt * f(w);
  }
  return s;
}

// Integral of f over the shell s*([-1,1]^n \ [-1/2,1/2]^n): the 4^n
// subcells of side s/2 minus the central 2^n.
template <class F>
double gauss_shell(int n, double s, F&& f) {
  int total = 1;
  for (int a = 0; a < n; ++a) total *= 4;
  double acc = 0;
  for (int t = 0; t < total; ++t) {
    int r = t;
    int idx[3] = {0, 0, 0};
    bool central = true;
    for (int a = 0; a < n; ++a) {
      idx[a] = r % 4;
      r /= 4;
      if (idx[a] == 0 || idx[a] == 3) central = false;
    }
    if (central) continue;
    double lo[3], hi[3];
    for (int a = 0; a < n; ++a) {
      lo[a] = s * (-1.0 + 0.5 * idx[a]);
      hi[a] = lo[a] + 0.5 * s;
    }
    acc += gauss_box(n, lo, hi, f);
  }
  return acc;
}

std::mutex cache_mutex;

}  // namespace

double unit_cell_self_mean(int n, double beta) {
  if (n < 1 || n > 3 || beta <= 0 || beta >= n)
    throw std::invalid_argument("unit_cell_self_mean: need 0 < beta < n");
  static std::map<std::pair<int, double>, double> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find({n, beta});
  if (it != cache.end()) return it->second;

  auto norm = [n](const double* w) {
    double s = 0;
    for (int a = 0; a < n; ++a) s += w[a] * w[a];
    return std::sqrt(s);
  };
  // C = integral of |w|^-beta over [-1,1]^n via self-similarity:
  // C = S + 2^{beta-n} C with S the outermost-shell integral.
  double S = gauss_shell(n, 1.0, [&](const double* w) { return std::pow(norm(w), -beta); });
  double C = S / (1.0 - std::pow(2.0, beta - n));

  // I = integral of prod(1-|w_i|) |w|^-beta over [-1,1]^n: sum dyadic
  // shells 2^-k * ([-1,1]^n \ [-1/2,1/2]^n), close with the inner cube
  // where the triangular weight is 1 + O(2^-K).
  const int K = 50;
  double I = 0;
  for (int k = 0; k <= K; ++k) {
    double s = std::pow(2.0, -k);
    I += gauss_shell(n, s, [&](const double* w) {
      double g = 1;
      for (int a = 0; a < n; ++a) g *= 1.0 - std::fabs(w[a]);
      return g * std::pow(norm(w), -beta);
    });
  }
  I += std::pow(2.0, -(K + 1) * (n - beta)) * C;
  cache[{n, beta}] = I;
  return I;
}

double unit_cell_adjacent_mean(int n, double beta, const std::array<int, 3>& e) {
  std::array<int, 3> key{std::abs(e[0]), n >= 2 ? std::abs(e[1]) : 0,
                         n >= 3 ? std::abs(e[2]) : 0};
  // sort descending so the offsets land on axes < n
  std::sort(key.begin(), key.end(), std::greater<int>());
  if (key[0] != 1) throw std::invalid_argument("unit_cell_adjacent_mean: |e|_inf must be 1");
  static std::map<std::tuple<int, double, int, int, int>, double> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto ck = std::make_tuple(n, beta, key[0], key[1], key[2]);
  auto it = cache.find(ck);
  if (it != cache.end()) return it->second;

  // Mean over x in [0,1)^n, y in e + [0,1)^n of |x-y|^-beta, 3-pt Gauss
  // product in each cell. Gauss nodes are interior, so no pair coincides.
  int pts = 1;
  for (int a = 0; a < n; ++a) pts *= 3;
  double acc = 0;
  for (int s = 0; s < pts; ++s)
    for (int t = 0; t < pts; ++t) {
      int rs = s, rt = t;
      double d2 = 0, wt = 1;
      for (int a = 0; a < n; ++a) {
        int i = rs % 3, j = rt % 3;
        rs /= 3;
        rt /= 3;
        double dx = kG3x[i] - (key[a] + kG3x[j]);
        d2 += dx * dx;
        wt *= kG3w[i] * kG3w[j];
      }
      acc += wt * std::pow(d2, -0.5 * beta);
    }
  cache[ck] = acc;
  return acc;
}

double cell_pair_kernel(int n, double beta, const std::array<int, 3>& d, double h) {
  int m = 0;
  for (int a = 0; a < n; ++a) m = std::max(m, std::abs(d[a]));
  if (m == 0) return std::pow(h, -beta) * unit_cell_self_mean(n, beta);
  if (m == 1) return std::pow(h, -beta) * unit_cell_adjacent_mean(n, beta, d);
  double r2 = 0;
  for (int a = 0; a < n; ++a) r2 += double(d[a]) * d[a];
  return std::pow(h * std::sqrt(r2), -beta);
}

std::complex<double> log_gamma(std::complex<double> z) {
  // Lanczos, g = 7, 9 terms.
  static const double c[9] = {0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
                              771.32342877765313,   -176.61502916214059, 12.507343278686905,
                              -0.13857109526572012, 9.9843695780195716e-6,
                              1.5056327351493116e-7};
  if (z.real() < 0.5) {
    // Reflection: log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z).
    return std::log(kPi / std::sin(kPi * z)) - log_gamma(1.0 - z);
  }
  z -= 1.0;
  std::complex<double> x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + double(i));
  std::complex<double> t = z + 7.5;
  return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

std::complex<double> gamma_fn(std::complex<double> z) { return std::exp(log_gamma(z)); }

namespace {

// I_nu(w) power series; valid for moderate |w|.
std::complex<double> bessel_i_series(std::complex<double> nu, std::complex<double> w) {
  std::complex<double> half = 0.5 * w;
  std::complex<double> lead = std::exp(nu * std::log(half) - log_gamma(nu + 1.0));
  std::complex<double> q = half * half;
  std::complex<double> term = 1.0, sum = 1.0;
  for (int m = 1; m <= 200; ++m) {
    term *= q / (double(m) * (nu + double(m)));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return lead * sum;
}

std::complex<double> bessel_k_via_series(std::complex<double> nu, std::complex<double> w) {
  // K_nu = pi/(2 sin(pi nu)) (I_{-nu} - I_{nu}), nu away from integers.
  return kPi / (2.0 * std::sin(kPi * nu)) *
         (bessel_i_series(-nu, w) - bessel_i_series(nu, w));
}

std::complex<double> bessel_k_asymptotic(std::complex<double> nu, std::complex<double> w) {
  std::complex<double> mu4 = 4.0 * nu * nu;
  std::complex<double> term = 1.0, sum = 1.0;
  double prev = 1e300;
  for (int k = 1; k <= 30; ++k) {
    double odd = 2.0 * k - 1.0;
    term *= (mu4 - odd * odd) / (double(k) * 8.0 * w);
    double a = std::abs(term);
    if (a > prev) break;  // divergent tail: stop at the smallest term
    sum += term;
    prev = a;
    if (a < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(kPi / (2.0 * w)) * std::exp(-w) * sum;
}

}  // namespace

std::complex<double> bessel_k(std::complex<double> nu, std::complex<double> w) {
  if (w.real() <= 0)
    throw std::domain_error("bessel_k: argument must have positive real part");
  if (nu.real() < 0) nu = -nu;  // K is even in the order
  if (std::abs(w) >= 14.0) return bessel_k_asymptotic(nu, w);
  double nearest = std::round(nu.real());
  if (std::abs(nu.imag()) < 1e-5 && std::abs(nu.real() - nearest) < 1e-5) {
    // Integer order: the sin formula degenerates; evaluate at the two
    // neighboring orders and average (K is entire in the order).
    const double eps = 1e-4;
    std::complex<double> base(nearest, nu.imag());
    return 0.5 * (bessel_k_via_series(base + eps, w) + bessel_k_via_series(base - eps, w));
  }
  return bessel_k_via_series(nu, w);
}

}  // namespace wre
