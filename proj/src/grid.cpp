#include "wre/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace wre {

namespace {

bool is_pow2(int x) { return x >= 1 && (x & (x - 1)) == 0; }

}  // namespace

Grid::Grid(int n_, int N_, double L_) : n(n_), N(N_), L(L_) {
  if (n < 1 || n > 3) throw std::invalid_argument("Grid: dimension must be 1, 2 or 3");
  if (!is_pow2(N) || N < 8) throw std::invalid_argument("Grid: N must be a power of two >= 8");
  if (!(L > 0)) throw std::invalid_argument("Grid: L must be positive");
}

double Grid::dxi() const { return M_PI / L; }

std::int64_t Grid::points() const {
  std::int64_t p = 1;
  for (int a = 0; a < n; ++a) p *= N;
  return p;
}

double Grid::freq(int bin) const {
  int k = bin < N / 2 ? bin : bin - N;
  return dxi() * k;
}

std::array<double, 3> Grid::point(std::int64_t flat) const {
  std::array<double, 3> x{0, 0, 0};
  for (int a = n - 1; a >= 0; --a) {
    x[a] = coord(static_cast<int>(flat % N));
    flat /= N;
  }
  return x;
}

double TimeAxis::freq(int bin) const {
  int k = bin < Nt / 2 ? bin : bin - Nt;
  return 2.0 * M_PI * k / (t1 - t0);
}

Field::Field(const Grid& g) : grid_(g), v_(static_cast<size_t>(g.points())) {}

Field::Field(const Grid& g, const TimeAxis& t)
    : grid_(g), time_(t), v_(static_cast<size_t>(g.points()) * t.Nt) {
  if (t.Nt < 2) throw std::invalid_argument("Field: time axis needs Nt >= 2");
}

Field& Field::operator+=(const Field& o) {
  if (o.size() != size()) throw std::invalid_argument("Field: size mismatch in +=");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  if (o.size() != size()) throw std::invalid_argument("Field: size mismatch in -=");
  for (size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

Field& Field::operator*=(cplx c) {
  for (auto& z : v_) z *= c;
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(cplx c, Field a) { return a *= c; }

namespace {

// FFTW plans keyed by (rank dims..., howmany, sign). Planning is not
// thread-safe; execution on matching buffers is.
struct PlanKey {
  std::vector<int> dims;
  int howmany;
  int sign;
  bool operator<(const PlanKey& o) const {
    if (dims != o.dims) return dims < o.dims;
    if (howmany != o.howmany) return howmany < o.howmany;
    return sign < o.sign;
  }
};

std::mutex g_plan_mutex;
std::map<PlanKey, fftw_plan> g_plans;

fftw_plan get_plan(const std::vector<int>& dims, int howmany, int sign, cplx* buf) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  PlanKey key{dims, howmany, sign};
  auto it = g_plans.find(key);
  if (it != g_plans.end()) return it->second;
  std::int64_t per = 1;
  for (int d : dims) per *= d;
  fftw_plan p = fftw_plan_many_dft(
      static_cast<int>(dims.size()), dims.data(), howmany,
      reinterpret_cast<fftw_complex*>(buf), nullptr, 1, static_cast<int>(per),
      reinterpret_cast<fftw_complex*>(buf), nullptr, 1, static_cast<int>(per),
      sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  g_plans.emplace(key, p);
  return p;
}

void run_fft(std::vector<cplx>& v, const std::vector<int>& dims, int howmany, int sign) {
  fftw_plan p = get_plan(dims, howmany, sign, v.data());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(v.data()),
                   reinterpret_cast<fftw_complex*>(v.data()));
}

// Alternating-sign factor (-1)^{sum of bin indices} realizing the node
// offset -L (and likewise the shift to signed frequency indexing).
void apply_checkerboard_spatial(Field& f) {
  const Grid& g = f.grid();
  const std::int64_t sp = g.points();
  for (int it = 0; it < f.time_size(); ++it) {
    std::int64_t base = f.slice_offset(it);
    for (std::int64_t j = 0; j < sp; ++j) {
      std::int64_t r = j;
      int s = 0;
      for (int a = 0; a < g.n; ++a) {
        s += static_cast<int>(r % g.N);
        r /= g.N;
      }
      if (s & 1) f[base + j] = -f[base + j];
    }
  }
}

// Phase e^{-sign * i * t0 * tau_k} attached to time bins (t0 need not be 0).
void apply_time_phase(Field& f, int sign) {
  const TimeAxis& t = *f.time();
  if (t.t0 == 0.0) return;
  const std::int64_t sp = f.spatial_size();
  for (int m = 0; m < t.Nt; ++m) {
    cplx ph = std::exp(cplx(0, -sign * t.t0 * t.freq(m)));
    std::int64_t base = f.slice_offset(m);
    for (std::int64_t j = 0; j < sp; ++j) f[base + j] *= ph;
  }
}

std::vector<int> spatial_dims(const Grid& g) { return std::vector<int>(g.n, g.N); }

}  // namespace

Field dft_forward(const Field& f) {
  Field out = f;
  const Grid& g = f.grid();
  if (f.has_time()) {
    std::vector<int> dims{f.time()->Nt};
    for (int a = 0; a < g.n; ++a) dims.push_back(g.N);
    run_fft(out.data(), dims, 1, FFTW_FORWARD);
  } else {
    run_fft(out.data(), spatial_dims(g), 1, FFTW_FORWARD);
  }
  apply_checkerboard_spatial(out);
  double norm = std::pow(1.0 / std::sqrt(double(g.N)), g.n);
  if (f.has_time()) norm /= std::sqrt(double(f.time()->Nt));
  out *= norm;
  if (f.has_time()) apply_time_phase(out, +1);
  return out;
}

Field dft_inverse(const Field& f) {
  Field out = f;
  const Grid& g = f.grid();
  if (f.has_time()) apply_time_phase(out, -1);
  apply_checkerboard_spatial(out);
  if (f.has_time()) {
    std::vector<int> dims{f.time()->Nt};
    for (int a = 0; a < g.n; ++a) dims.push_back(g.N);
    run_fft(out.data(), dims, 1, FFTW_BACKWARD);
  } else {
    run_fft(out.data(), spatial_dims(g), 1, FFTW_BACKWARD);
  }
  double norm = std::pow(1.0 / std::sqrt(double(g.N)), g.n);
  if (f.has_time()) norm /= std::sqrt(double(f.time()->Nt));
  out *= norm;
  return out;
}

Field dft_forward_spatial(const Field& f) {
  Field out = f;
  const Grid& g = f.grid();
  run_fft(out.data(), spatial_dims(g), f.time_size(), FFTW_FORWARD);
  apply_checkerboard_spatial(out);
  out *= std::pow(1.0 / std::sqrt(double(g.N)), g.n);
  return out;
}

Field dft_inverse_spatial(const Field& f) {
  Field out = f;
  const Grid& g = f.grid();
  apply_checkerboard_spatial(out);
  run_fft(out.data(), spatial_dims(g), f.time_size(), FFTW_BACKWARD);
  out *= std::pow(1.0 / std::sqrt(double(g.N)), g.n);
  return out;
}

double l2_norm(const Field& f) {
  double s = 0;
  for (const auto& z : f.data()) s += std::norm(z);
  double cell = std::pow(f.grid().h(), f.grid().n);
  if (f.has_time()) cell *= f.time()->dt();
  return std::sqrt(s * cell);
}

cplx inner(const Field& a, const Field& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  cplx s = 0;
  for (std::int64_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  double cell = std::pow(a.grid().h(), a.grid().n);
  if (a.has_time()) cell *= a.time()->dt();
  return s * cell;
}

WeightedNormSpec::WeightedNormSpec(const Grid& g, std::vector<double> w_)
    : grid(g), w(std::move(w_)) {
  if (static_cast<std::int64_t>(w.size()) != g.points())
    throw std::invalid_argument("WeightedNormSpec: weight size mismatch with grid");
  for (double x : w)
    if (x < 0) throw std::domain_error("WeightedNormSpec: negative weight sample");
}

WeightedNormSpec WeightedNormSpec::unit(const Grid& g) {
  return WeightedNormSpec(g, std::vector<double>(static_cast<size_t>(g.points()), 1.0));
}

double weighted_l2_norm(const Field& f, const WeightedNormSpec& spec) {
  if (f.grid() != spec.grid)
    throw std::invalid_argument("weighted_l2_norm: field and weight on different grids");
  const std::int64_t sp = f.spatial_size();
  double s = 0;
  for (int it = 0; it < f.time_size(); ++it) {
    std::int64_t base = f.slice_offset(it);
    for (std::int64_t j = 0; j < sp; ++j) s += std::norm(f[base + j]) * spec.w[static_cast<size_t>(j)];
  }
  double cell = std::pow(f.grid().h(), f.grid().n);
  if (f.has_time()) cell *= f.time()->dt();
  return std::sqrt(s * cell);
}

Field apply_multiplier(const Field& f, const MultiplierSpec& m) {
  const Grid& g = f.grid();
  if (m.spacetime && !f.has_time())
    throw std::invalid_argument("apply_multiplier: space-time symbol needs a space-time field");
  Field hat = m.spacetime ? dft_forward(f) : dft_forward_spatial(f);
  const std::int64_t sp = g.points();
  std::vector<cplx> sym(static_cast<size_t>(sp));
  std::array<double, 3> xi{0, 0, 0};
  auto fill_symbol = [&](double tau) {
    for (std::int64_t j = 0; j < sp; ++j) {
      std::int64_t r = j;
      for (int a = g.n - 1; a >= 0; --a) {
        xi[a] = g.freq(static_cast<int>(r % g.N));
        r /= g.N;
      }
      cplx v = m.symbol(xi, tau);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "apply_multiplier: symbol %s undefined at xi=(%g,%g,%g), tau=%g",
                      m.name.c_str(), xi[0], xi[1], xi[2], tau);
        throw std::domain_error(buf);
      }
      sym[static_cast<size_t>(j)] = v;
    }
  };
  if (!m.spacetime) {
    fill_symbol(0.0);
    for (int it = 0; it < f.time_size(); ++it) {
      std::int64_t base = hat.slice_offset(it);
      for (std::int64_t j = 0; j < sp; ++j) hat[base + j] *= sym[static_cast<size_t>(j)];
    }
    return dft_inverse_spatial(hat);
  }
  for (int it = 0; it < f.time_size(); ++it) {
    fill_symbol(f.time()->freq(it));
    std::int64_t base = hat.slice_offset(it);
    for (std::int64_t j = 0; j < sp; ++j) hat[base + j] *= sym[static_cast<size_t>(j)];
  }
  return dft_inverse(hat);
}

namespace {

void put_u64(FILE* fp, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  std::fwrite(b, 1, 8, fp);
}

std::uint64_t get_u64(FILE* fp) {
  unsigned char b[8];
  if (std::fread(b, 1, 8, fp) != 8) throw std::runtime_error("read_field: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t dbl_bits(double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  return v;
}

double bits_dbl(std::uint64_t v) {
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

}  // namespace

void write_field(const Field& f, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("write_field: cannot open " + path);
  const Grid& g = f.grid();
  // Header T convention: T > 0 means window [0,T); T < 0 means [-|T|,|T|).
  double T = 0;
  int Nt = 0;
  if (f.has_time()) {
    Nt = f.time()->Nt;
    T = f.time()->t0 < 0 ? -f.time()->t1 : f.time()->t1;
  }
  put_u64(fp, static_cast<std::uint64_t>(g.n));
  put_u64(fp, static_cast<std::uint64_t>(g.N));
  put_u64(fp, dbl_bits(g.L));
  put_u64(fp, static_cast<std::uint64_t>(Nt));
  put_u64(fp, dbl_bits(T));
  for (const auto& z : f.data()) {
    put_u64(fp, dbl_bits(z.real()));
    put_u64(fp, dbl_bits(z.imag()));
  }
  std::fclose(fp);
}

Field read_field(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  if (!fp) throw std::runtime_error("read_field: cannot open " + path);
  int n = static_cast<int>(get_u64(fp));
  int N = static_cast<int>(get_u64(fp));
  double L = bits_dbl(get_u64(fp));
  int Nt = static_cast<int>(get_u64(fp));
  double T = bits_dbl(get_u64(fp));
  Grid g(n, N, L);
  Field f = Nt == 0 ? Field(g)
                    : Field(g, T < 0 ? TimeAxis{T, -T, Nt} : TimeAxis{0, T, Nt});
  for (auto& z : f.data()) {
    double re = bits_dbl(get_u64(fp));
    double im = bits_dbl(get_u64(fp));
    z = cplx(re, im);
  }
  std::fclose(fp);
  return f;
}

}  // namespace wre
