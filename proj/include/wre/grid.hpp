#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wre {

using cplx = std::complex<double>;

/// Uniform periodic grid on the box [-L, L)^n, n in {1,2,3}.
/// Nodes x_i = -L + i*h with h = 2L/N; frequencies xi_k = pi*k/L for
/// k in {-N/2, ..., N/2-1} per axis. Spectral arrays use FFT bin order:
/// bin m holds the signed frequency index m < N/2 ? m : m - N.
struct Grid {
  int n = 1;
  int N = 8;
  double L = 1.0;

  Grid() = default;
  Grid(int n_, int N_, double L_);

  double h() const { return 2.0 * L / N; }
  double dxi() const;  // frequency spacing pi/L
  std::int64_t points() const;

  double coord(int i) const { return -L + i * h(); }
  double freq(int bin) const;  // signed frequency of FFT bin
  double nyquist() const { return dxi() * (N / 2); }

  // Node coordinates of a flat spatial index (row-major, axis 0 slowest).
  std::array<double, 3> point(std::int64_t flat) const;

  bool operator==(const Grid&) const = default;
};

/// Uniform time axis [t0, t1) with Nt samples, periodic for the time DFT.
struct TimeAxis {
  double t0 = 0.0;
  double t1 = 1.0;
  int Nt = 64;

  double dt() const { return (t1 - t0) / Nt; }
  double node(int m) const { return t0 + m * dt(); }
  double freq(int bin) const;  // tau_k = 2*pi*k/(t1-t0), signed bin
  bool operator==(const TimeAxis&) const = default;
};

/// Complex field sampled on a Grid, optionally with a time axis.
/// Layout: index = (it * N^n) + spatial flat index, spatial row-major.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g);
  Field(const Grid& g, const TimeAxis& t);

  const Grid& grid() const { return grid_; }
  const std::optional<TimeAxis>& time() const { return time_; }
  bool has_time() const { return time_.has_value(); }

  std::int64_t size() const { return static_cast<std::int64_t>(v_.size()); }
  std::int64_t spatial_size() const { return grid_.points(); }
  int time_size() const { return time_ ? time_->Nt : 1; }

  cplx& operator[](std::int64_t i) { return v_[static_cast<size_t>(i)]; }
  const cplx& operator[](std::int64_t i) const { return v_[static_cast<size_t>(i)]; }

  std::vector<cplx>& data() { return v_; }
  const std::vector<cplx>& data() const { return v_; }

  // Spatial slice (time index it) as offset into the flat array.
  std::int64_t slice_offset(int it) const { return std::int64_t(it) * spatial_size(); }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx c);

 private:
  Grid grid_;
  std::optional<TimeAxis> time_;
  std::vector<cplx> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx c, Field a);

/// Discrete-unitary DFT: forward realizes N^{-d/2} * sum f e^{-i x.xi}
/// (node phases included), so Parseval holds exactly with the same h^n
/// quadrature weight on both sides. Continuum-normalized coefficients
/// are the stored ones times (h/dxi)^{n/2} (and (dt/dtau)^{1/2} in t).
Field dft_forward(const Field& f);
Field dft_inverse(const Field& f);

// Spatial-only transforms for space-time fields (each time slice).
Field dft_forward_spatial(const Field& f);
Field dft_inverse_spatial(const Field& f);

/// Plain L2 norm with midpoint quadrature weight h^n (times dt in time).
double l2_norm(const Field& f);
cplx inner(const Field& a, const Field& b);  // <a,b> = sum a conj(b) h^n (dt)

/// Nonnegative weight on the spatial grid with midpoint quadrature.
struct WeightedNormSpec {
  Grid grid;
  std::vector<double> w;

  WeightedNormSpec(const Grid& g, std::vector<double> w_);
  static WeightedNormSpec unit(const Grid& g);
};

double weighted_l2_norm(const Field& f, const WeightedNormSpec& w);

/// Fourier multiplier; symbol evaluated at grid frequencies.
/// Space-only symbols get tau = 0 for space-time fields and are applied
/// per time slice without transforming in t.
struct MultiplierSpec {
  std::function<cplx(const std::array<double, 3>& xi, double tau)> symbol;
  bool spacetime = false;  // if true, transform in t as well
  std::string name;
};

Field apply_multiplier(const Field& f, const MultiplierSpec& m);

// Binary serialization: header (n, N, L, Nt, T as little-endian 64-bit
// values; Nt = 0 and T = 0 for space-only fields) then interleaved
// re/im doubles in row-major order.
void write_field(const Field& f, const std::string& path);
Field read_field(const std::string& path);

}  // namespace wre
