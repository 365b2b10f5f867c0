#pragma once

#include <array>
#include <complex>

namespace wre {

/// Mean of |x-y|^{-beta} over a pair of coincident unit cells [0,1)^n,
/// 0 < beta < n. Computed once per (n, beta) by dyadically refined Gauss
/// quadrature and cached.
double unit_cell_self_mean(int n, double beta);

/// Mean of |x-y|^{-beta} over unit cells offset by e (|e|_inf = 1),
/// 3-point Gauss product per cell. Cached per (n, beta, sorted |e|).
double unit_cell_adjacent_mean(int n, double beta, const std::array<int, 3>& e);

/// Kernel value for a pair of grid cells of spacing h whose index offset
/// is d: cell-averaged for coincident and adjacent cells, center distance
/// beyond. This is the quadrature rule shared by the singular integrals.
double cell_pair_kernel(int n, double beta, const std::array<int, 3>& d, double h);

/// log Gamma for complex argument (Lanczos).
std::complex<double> log_gamma(std::complex<double> z);
std::complex<double> gamma_fn(std::complex<double> z);

/// Modified Bessel function K_nu(w) for complex order and argument with
/// Re w > 0: series via I_{+-nu} for small |w|, asymptotic expansion for
/// large |w|.
std::complex<double> bessel_k(std::complex<double> nu, std::complex<double> w);

}  // namespace wre
