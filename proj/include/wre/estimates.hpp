#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wre/class_norms.hpp"
#include "wre/grid.hpp"
#include "wre/operators.hpp"
#include "wre/potential.hpp"
#include "wre/probe.hpp"

namespace wre {

/// How the reciprocal weight |V|^{-1} is realized where V vanishes:
/// either trials are confined to the support (the |V|^{1/2} sandwich
/// does this automatically), or V is replaced by |V| + delta*min(1,|x|^-2)
/// with delta gauged to 1% of V's mass.
enum class WeightMode { support_restricted, floor_regularized };

/// Parameter samples the uniformity claims are swept over. standard()
/// builds a default set respecting the operator preconditions on g
/// (interior samples keep |Im z| >= 4 frequency spacings; radii stay in
/// the resolvable band).
struct SweepGrid {
  std::vector<cplx> z;
  std::vector<double> r;
  std::vector<double> beta;
  std::vector<std::array<double, 4>> nu;  // unit vectors, last = time component
  std::vector<double> imlambda;

  static SweepGrid standard(const Grid& g);
};

struct SampleRecord {
  std::map<std::string, double> params;
  double constant = 0;
  int iterations = 0;
  bool skipped = false;  // e.g. exact symbol zero at a grid frequency
  std::string note;
};

struct EstimateReport {
  std::string estimate;
  std::string potential;
  std::string mode;
  std::uint64_t seed = 0;
  Grid grid;
  std::vector<SampleRecord> samples;
  double sup = 0;
  double slope = 0;  // log-log trend statistic vs the swept parameter
  bool verdict = false;
  std::map<std::string, double> extra;  // named auxiliary quantities

  nlohmann::json to_json() const;
  std::string to_csv() const;  // one row per sample, plot-ready
};

/// The potential actually used as weight under the active mode (floor
/// mode adds the gauged regularization floor).
Potential weight_potential(const Potential& V, const Grid& g, WeightMode mode);

/// |V| node samples under the active mode.
std::vector<double> weight_samples(const Potential& V, const Grid& g, WeightMode mode);

/// Plain operator norm of the weighted space-time symbol sandwich
/// |V|^{1/2} m(D) |V|^{1/2} for the symbols of the multiplier reductions.
double spacetime_symbol_norm(const Potential& V, const Grid& g, const TimeAxis& t,
                             const SpaceTimeSymbol& s, WeightMode mode,
                             std::uint64_t seed = 1);

/// Pointwise multiply by w^power; points with w = 0 map to 0.
Field weight_multiply(const Field& f, const std::vector<double>& w, double power);

/// The sandwich |V|^{1/2} R_0(z) |V|^{1/2} as a LinearMap (its plain
/// operator norm is the weighted resolvent constant).
LinearMap weighted_resolvent_map(const Potential& V, const Grid& g, cplx z,
                                 WeightMode mode);

/// Least-squares slope of log(y) against log(x); ignores y <= 0.
double log_slope(const std::vector<double>& x, const std::vector<double>& y);

/// sup_z || |V|^{1/2} R_0(z) |V|^{1/2} || over the sweep, with the
/// trend in |Im z| as the uniformity statistic.
EstimateReport measure_resolvent_constant(const Potential& V, const Grid& g,
                                          const SweepGrid& sweep,
                                          WeightMode mode = WeightMode::support_restricted,
                                          std::uint64_t seed = 1);

/// Ratio (measured resolvent sup)/(sn bracket) across a potential
/// family; verdict: ratios bounded (max/min <= 10) and trend-free.
EstimateReport verify_sn_domination(const std::vector<Potential>& family, const Grid& g,
                                    const SweepGrid& sweep,
                                    WeightMode mode = WeightMode::support_restricted,
                                    std::uint64_t seed = 1);

/// The convolution / restriction / extension constants at each radius,
/// their exact duality and TT* identities, and the r^{1/2} trend.
EstimateReport verify_restriction_trio(const Potential& V, const Grid& g,
                                       const std::vector<double>& r_sweep,
                                       WeightMode mode = WeightMode::support_restricted,
                                       std::uint64_t seed = 1);

/// Homogeneous / dual / Duhamel space-time constants and their
/// domination by the resolvent sup.
EstimateReport verify_strichartz(const Potential& V, const Grid& g, const TimeAxis& t,
                                 const SweepGrid& sweep,
                                 WeightMode mode = WeightMode::support_restricted,
                                 std::uint64_t seed = 1);

/// sup_u ||u||_{L2(|V|)}^2 / ||grad u||_2^2 (gradient as the multiplier
/// |xi|, zero mode excluded) against the Morrey-Campanato and
/// Kerman-Sawyer gauges.
EstimateReport verify_fefferman_phong(const Potential& V, double p, const Grid& g,
                                      std::uint64_t seed = 1);

/// Conjugated-form constants over (beta, nu): the space-time multiplier
/// 1/(-tau - |xi|^2 + Phat(xi)) sandwiched between the weights; verdict
/// is boundedness plus a flat log-log trend in 1 + beta.
EstimateReport verify_carleman(const Potential& V, const Grid& g, const TimeAxis& t,
                               const std::vector<double>& betas,
                               const std::vector<std::array<double, 4>>& nus,
                               WeightMode mode = WeightMode::support_restricted,
                               std::uint64_t seed = 1);

/// First-order-perturbed symbol 1/(-tau - |xi|^2 + i<c,xi> + z): the
/// measured constant for (c, z) against its modulated reduction.
EstimateReport verify_sobolev_pd(const Potential& V, const std::array<cplx, 3>& c,
                                 cplx z, const Grid& g, const TimeAxis& t,
                                 WeightMode mode = WeightMode::support_restricted,
                                 std::uint64_t seed = 1);

/// The analytic family endpoints: exactness of the unimodular bound at
/// Re lambda = 0 and the Kerman-Sawyer-gauged constant at
/// Re lambda = (n-1)/2.
EstimateReport verify_tlambda_line(const Potential& V, cplx z,
                                   const std::vector<double>& imlambda, const Grid& g,
                                   std::uint64_t seed = 1);

/// Interior pairings along a decreasing eps sequence, their Richardson
/// limit, the boundary pairing, and the weighted boundary bound ratio.
struct WeakLimitRecord {
  std::vector<double> eps;
  std::vector<cplx> pairings;
  cplx extrapolated{0, 0};
  cplx boundary{0, 0};
  double limit_rel_err = 0;      // |extrapolated - boundary| / |boundary|
  double jump_rel_err = 0;       // jump vs the sphere term
  double weighted_ratio = 0;     // ||R0(l+i0)f||_{L2(|V|)} / (C ||f||_{L2(|V|^-1)})

  nlohmann::json to_json() const;
};

WeakLimitRecord measure_weak_limit(const Potential& V, const Field& f, const Field& h,
                                   double lambda, int sign, std::vector<double> eps,
                                   double interior_sup,
                                   WeightMode mode = WeightMode::support_restricted);

}  // namespace wre
