#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wre/estimates.hpp"
#include "wre/grid.hpp"
#include "wre/potential.hpp"

namespace wre {

/// i du/dt + Laplacian u - V u = F on the periodic box over [t0, t1),
/// datum u0 at the window start. F may be empty (zero forcing).
struct CauchyProblem {
  Grid grid;
  TimeAxis time;
  Potential V;
  Field u0;  // spatial
  Field F;   // space-time, or default-constructed for zero
};

struct SolverConfig {
  int max_iterations = 50;
  double tolerance = 1e-10;  // relative, iterate difference in L2(|V|)
  WeightMode mode = WeightMode::support_restricted;
  int time_quadrature_order = 2;    // trapezoid; the only order implemented
  bool zero_initial_guess = false;  // start from 0 instead of the free part
};

struct SolutionDiagnostics {
  std::vector<double> difference_history;  // weighted iterate differences
  double contraction_factor = 0;           // max ratio of successive differences
  double operator_factor = 0;              // power-iteration norm of the fixed-point map
  double residual = 0;                     // tapered spectral residual of the PDE
  double apriori_ratio_1 = 0;              // weighted space-time bound
  double apriori_ratio_2 = 0;              // sup-in-time L2 bound
  double majorant_factor = 0;              // factor of the majorant (time-dependent runs)
  bool converged = false;
  bool non_contraction = false;
  double wall_clock_seconds = 0;  // not serialized: reports stay reproducible

  nlohmann::json to_json() const;
};

/// The fixed-point increment: -i * retarded Duhamel integral of V u.
Field phi_map(const Field& u, const Potential& V);

/// Free part of the Duhamel representation: e^{itDelta}u0 - i * retarded
/// Duhamel integral of F.
Field free_solution(const CauchyProblem& p);

/// Power-iteration operator norm of phi_map on L2_{t,x}(|V|) under the
/// configured weight mode.
double contraction_factor(const Potential& V, const Grid& g, const TimeAxis& t,
                          WeightMode mode = WeightMode::support_restricted,
                          std::uint64_t seed = 1);

/// c * V realized through its node samples (the solver only ever sees
/// the sampled potential).
Potential scale_coupling(const Potential& V, double c, const Grid& g);

/// Coupling c with contraction_factor(cV) equal to target, located by
/// bisection on the measured factor.
double coupling_bisection(const Potential& V, const Grid& g, const TimeAxis& t,
                          double target = 0.5,
                          WeightMode mode = WeightMode::support_restricted,
                          std::uint64_t seed = 1);

/// Picard iteration on u = free + phi(u). If the measured operator
/// factor is >= 1 the solver refuses to iterate and returns the
/// diagnosis (non_contraction set, factor recorded).
std::pair<Field, SolutionDiagnostics> solve_picard(const CauchyProblem& p,
                                                   const SolverConfig& cfg = {});

/// Tapered spectral residual ||i du/dt + Laplacian u - V u - F|| with the
/// time derivative taken on the Hann-tapered window (relative to the
/// tapered data norm).
double solve_residual(const CauchyProblem& p, const Field& u);

/// Fills the a-priori bound ratios; bracket is the potential-class
/// gauge [V] entering the right-hand sides.
void check_apriori_bounds(const CauchyProblem& p, const Field& u, double bracket,
                          SolutionDiagnostics& diag,
                          WeightMode mode = WeightMode::support_restricted);

/// Independent Strang split-step oracle, substeps fine steps per output
/// node; forcing handled exactly inside the affine potential sub-flow.
Field reference_splitstep(const CauchyProblem& p, int substeps);

/// Split-step oracle with node samples of a time-dependent potential
/// (linearly interpolated between nodes).
Field reference_splitstep_td(const CauchyProblem& p, const Field& Vt, int substeps);

/// Same Picard machinery with a time-dependent potential given by node
/// samples (real part of Vt); requires |Vt(x,t)| <= W(x) on every node.
std::pair<Field, SolutionDiagnostics> solve_time_dependent(const CauchyProblem& p,
                                                           const Field& Vt,
                                                           const Potential& W,
                                                           const SolverConfig& cfg = {});

}  // namespace wre
