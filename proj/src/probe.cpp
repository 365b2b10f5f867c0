#include "wre/probe.hpp"

#include <lapacke.h>

#include <cmath>
#include <random>
#include <stdexcept>

namespace wre {

ProbeResult operator_norm(const LinearMap& A, const Field& seed, int cap, double tol) {
  if (!A.forward || !A.adjoint) throw std::invalid_argument("operator_norm: map incomplete");
  ProbeResult res;
  Field v = seed;
  double nv = l2_norm(v);
  if (nv == 0) throw std::invalid_argument("operator_norm: zero seed");
  v *= 1.0 / nv;

  double prev = -1;
  for (int k = 0; k < cap; ++k) {
    Field w = A.forward(v);
    double sigma = l2_norm(w);
    res.iterations = k + 1;
    if (sigma == 0) {
      res.norm = 0;
      res.converged = true;
      res.vec = std::move(v);
      return res;
    }
    res.norm = sigma;
    if (prev >= 0 && std::fabs(sigma - prev) <= tol * sigma) {
      res.converged = true;
      res.vec = std::move(v);
      return res;
    }
    prev = sigma;
    Field u = A.adjoint(w);
    double nu = l2_norm(u);
    if (nu == 0) {  // range collapsed; sigma is exact on this vector
      res.converged = true;
      res.vec = std::move(v);
      return res;
    }
    u *= 1.0 / nu;
    v = std::move(u);
  }
  res.vec = std::move(v);
  return res;  // cap hit: converged stays false, norm is the last estimate
}

namespace {

void fill_gaussian(Field& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::int64_t i = 0; i < f.size(); ++i) f[i] = cplx(nd(rng), nd(rng));
}

}  // namespace

Field random_field(const Grid& g, std::uint64_t seed) {
  Field f(g);
  fill_gaussian(f, seed);
  return f;
}

Field random_field(const Grid& g, const TimeAxis& t, std::uint64_t seed) {
  Field f(g, t);
  fill_gaussian(f, seed);
  return f;
}

std::vector<cplx> dense_matrix(const std::function<Field(const Field&)>& fwd,
                               const Grid& g) {
  std::int64_t M = g.points();
  if (M > 4096) throw std::invalid_argument("dense_matrix: grid too large");
  double hs = std::pow(g.h(), 0.5 * g.n);
  std::vector<cplx> a(static_cast<size_t>(M) * M);
  Field basis(g);
  for (std::int64_t j = 0; j < M; ++j) {
    basis[j] = 1.0 / hs;  // unit vector in the quadrature inner product
    Field col = fwd(basis);
    basis[j] = 0.0;
    for (std::int64_t i = 0; i < M; ++i) a[size_t(i) * M + j] = hs * col[i];
  }
  return a;
}

double dense_operator_norm(std::vector<cplx> a, int rows, int cols) {
  int mn = std::min(rows, cols);
  std::vector<double> s(mn), superb(mn > 1 ? mn - 1 : 1);
  int info = LAPACKE_zgesvd(LAPACK_ROW_MAJOR, 'N', 'N', rows, cols,
                            reinterpret_cast<lapack_complex_double*>(a.data()), cols,
                            s.data(), nullptr, 1, nullptr, 1, superb.data());
  if (info != 0) throw std::runtime_error("dense_operator_norm: zgesvd failed");
  return s[0];
}

}  // namespace wre
