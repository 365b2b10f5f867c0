#pragma once

#include <array>
#include <complex>
#include <vector>

#include "wre/grid.hpp"
#include "wre/potential.hpp"

namespace wre {

/// Spectral parameter: either a point z off the real axis, or a boundary
/// energy lambda +- i0 approached through a decreasing sequence eps_j -> 0.
struct SpectralParameter {
  enum class Kind { interior, boundary };
  Kind kind = Kind::interior;
  cplx z{0.0, 1.0};            // interior point, Im z != 0
  double lambda = 1.0;         // boundary energy, > 0
  int sign = +1;               // +1 for lambda+i0, -1 for lambda-i0
  std::vector<double> eps;     // strictly decreasing approach sequence

  static SpectralParameter interior(cplx z);
  static SpectralParameter boundary(double lambda, int sign,
                                    std::vector<double> eps);
  bool is_interior() const { return kind == Kind::interior; }
};

/// Quadrature on the sphere of radius r in R^n (n = 2 or 3): uniform
/// angles in 2-D, Gauss-Legendre in the polar cosine times uniform
/// azimuth in 3-D. Node set is symmetric under xi -> -xi; total weight
/// is the surface measure.
struct SphereQuadrature {
  int n = 3;
  double r = 1.0;
  int degree = 0;  // spherical harmonics integrated exactly up to this degree
  std::vector<std::array<double, 3>> nodes;
  std::vector<double> weights;

  // order = number of azimuth angles (n = 2, made even) or polar
  // Gauss-Legendre points (n = 3; azimuth gets 2*order angles).
  static SphereQuadrature build(int n, double r, int order);
  // Order chosen so plane waves e^{ix.xi} are resolved for |x| inside
  // the box of g.
  static SphereQuadrature for_grid(const Grid& g, double r);

  double total_weight() const;
};

/// (-Delta - z)^{-1} via the multiplier 1/(|xi|^2 - z); Im z != 0.
Field free_resolvent(const Field& f, cplx z);

/// (-Delta - z)^{-lambda}, principal branch of (|xi|^2 - z)^{-lambda}.
Field power_resolvent(const Field& f, cplx lambda, cplx z);

/// Samples of (2pi)^{-n/2} integral f(x) e^{+i x.xi_j} dx on the
/// quadrature nodes (adjoint of sphere_extension up to the (2pi) factor).
std::vector<cplx> sphere_restrict(const Field& f, const SphereQuadrature& q);

/// x -> sum_j w_j g_j e^{-i x.xi_j} on the nodes of g (sign convention
/// matching dft_forward).
Field sphere_extension(const std::vector<cplx>& g, const SphereQuadrature& q,
                       const Grid& grid);

/// Convolution with the Fourier transform of the sphere measure,
/// normalized so that sphere_convolution = F^{-1}[ delta_{S_r} F ];
/// realized as restrict-then-extend (the T*T form), hence self-adjoint
/// and positive.
Field sphere_convolution(const Field& f, const SphereQuadrature& q);

/// R_0(lambda +- i0): the sphere (delta) part and the principal-value
/// part, returned jointly and separately.
struct BoundaryResolvent {
  Field total;
  Field singular;   // +- (i pi / (2 sqrt(lambda))) * sphere convolution
  Field principal;  // symmetric-shell principal value multiplier
  double shell_width = 0;  // kappa0 actually used
};

/// shell_scale * (local spacing of |xi|^2 across one frequency bin at the
/// shell) is the half-width kappa0 of the excluded shell; inside it the
/// symbol is replaced by the odd linear interpolant s/kappa0^2 so that
/// symmetric pairs cancel to first order. Requires sqrt(lambda) in
/// [4 pi/L, Nyquist/2].
BoundaryResolvent boundary_resolvent(const Field& f, double lambda, int sign,
                                     double shell_scale = 4.0);

/// Riesz-type fractional integral: convolution with |x-y|^{alpha-n},
/// singular cells handled by the same cell-averaged kernel rule as the
/// class functionals; minimum-image periodic convolution via FFT.
Field fractional_integral(const Field& f, double alpha);

/// Kernel K_lambda(x) of (-Delta-z)^{-lambda} for Re lambda in (0, n/2),
/// radial in |x|; evaluated through the modified Bessel function of the
/// second kind. Used for the kernel bound checks; the operator itself is
/// applied as a multiplier.
cplx power_resolvent_kernel(int n, cplx lambda, cplx z, double absx);

/// |V|^{lambda/2} (-Delta-z)^{-lambda} |V|^{lambda/2}; Re lambda in
/// [0, (n-1)/2]. Points where V vanishes contribute zero.
Field t_lambda(const Field& f, cplx lambda, cplx z, const Potential& V);

/// e^{itDelta}: multiplier e^{-it|xi|^2}.
Field propagator(const Field& f, double t);

/// integral over the whole time window of e^{i(t-s)Delta} F(.,s) ds,
/// trapezoid in s (Riemann over the periodic window), exact in x.
Field duhamel_full(const Field& F);

/// integral from the window start to t of e^{i(t-s)Delta} F(.,s) ds,
/// cumulative trapezoid per spatial frequency.
Field duhamel_retarded(const Field& F);

/// Adjoint of duhamel_retarded in the dt-weighted inner product (the
/// advanced integral, exact transpose of the trapezoid stencil).
Field duhamel_retarded_adjoint(const Field& F);

/// dt^2-type quadrature error estimate for the Duhamel integrals:
/// (dt^2/12) * L2 norm of the second time difference of the integrand.
double duhamel_error_estimate(const Field& F);

/// Space-time symbols of the multiplier reductions: the full symbol
/// 1/(tau + |xi|^2 + i xi_n), its eps-regularized version, and the
/// one-dimensional band symbol m_{k,rho}(xi_n).
struct SpaceTimeSymbol {
  enum class Kind { full, regularized, band };
  Kind kind = Kind::full;
  double eps = 0;  // regularized
  int k = 0;       // band
  double rho = 0;  // band

  static SpaceTimeSymbol full();
  static SpaceTimeSymbol regularized(double eps);
  static SpaceTimeSymbol band(int k, double rho);

  // n picks the distinguished coordinate xi_n (last spatial axis).
  cplx value(const std::array<double, 3>& xi, double tau, int n) const;
};

/// Apply the space-time symbol through the (n+1)-dimensional DFT; an
/// exact zero of the symbol at a grid frequency is a domain error that
/// names the frequency.
Field spacetime_multiplier(const Field& f, const SpaceTimeSymbol& s);

}  // namespace wre
