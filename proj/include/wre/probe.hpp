#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wre/grid.hpp"

namespace wre {

/// A linear map together with its adjoint with respect to the plain
/// quadrature inner product. Domain and range may differ (space vs
/// space-time); the forward/adjoint closures carry the prototypes.
struct LinearMap {
  std::string id;
  std::function<Field(const Field&)> forward;
  std::function<Field(const Field&)> adjoint;
};

struct ProbeResult {
  double norm = 0;       // measured operator norm
  int iterations = 0;
  bool converged = false;
  Field vec;             // unit-norm right singular vector reached
};

/// Operator norm via power iteration on the normal composition A*A.
/// The seed field only starts the iteration; stop when the Rayleigh
/// estimate changes by less than tol relative, hard cap on iterations.
ProbeResult operator_norm(const LinearMap& A, const Field& seed,
                          int cap = 200, double tol = 1e-8);

/// Seeded complex Gaussian trial fields.
Field random_field(const Grid& g, std::uint64_t seed);
Field random_field(const Grid& g, const TimeAxis& t, std::uint64_t seed);

/// Dense matrix of the map on the orthonormal cell basis (row-major);
/// intended for small grids where an exact oracle is affordable.
std::vector<cplx> dense_matrix(const std::function<Field(const Field&)>& fwd,
                               const Grid& g);

/// Largest singular value of a row-major complex matrix (LAPACK).
double dense_operator_norm(std::vector<cplx> a, int rows, int cols);

}  // namespace wre
