#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wre/grid.hpp"
#include "wre/potential.hpp"

namespace wre {

/// Result of a potential-class functional: the value (+inf sentinel
/// allowed), where the sup was attained, the discretization parameters,
/// and the values seen under grid refinement (used for the divergence
/// verdict).
struct ClassNormResult {
  std::string cls;
  double value = 0;
  std::string attained_at;
  std::map<std::string, double> params;
  std::vector<double> refinement_trend;

  bool is_infinite() const;
  nlohmann::json to_json() const;
};

/// (integral |V|^p)^{1/p} over the box, node quadrature; analytically
/// non-integrable specs report +inf.
ClassNormResult lebesgue_norm(const Potential& V, double p, const Grid& g);

/// sup_lambda lambda * |{|V| >= lambda}|^{1/p} over 64 logarithmic levels.
ClassNormResult weak_norm(const Potential& V, double p, const Grid& g);

/// sup over dyadic cubes (with half-side shifts) of
/// |Q|^{alpha/n} (|Q|^{-1} integral_Q |V|^p)^{1/p}; requires p <= n/alpha.
ClassNormResult morrey_campanato_norm(const Potential& V, double alpha, double p,
                                      const Grid& g);

/// sup over cubes Q of (integral_Q |V|)^{-1} * double integral over QxQ of
/// |V(x)V(y)| |x-y|^{alpha-n}; alpha in (0,n). Both the dyadic-only and the
/// shift-augmented sup are recorded in params.
ClassNormResult kerman_sawyer_norm(const Potential& V, double alpha, const Grid& g);

/// ||  |V|^{(n-1)/2} ||_{KS_{n-1}}^{2/(n-1)}; defined for n >= 3.
ClassNormResult sn_bracket(const Potential& V, const Grid& g);

/// sup_x integral |V(y)| / |x-y| dy  (n = 3).
ClassNormResult kato_norm(const Potential& V, const Grid& g);

/// double integral of |V(x)V(y)| / |x-y|^2  (n = 3).
ClassNormResult rollnik_norm(const Potential& V, const Grid& g);

/// sup over cubes of (avg_Q w)(avg_Q w^{-1}); w must be a.e. positive,
/// divergence under refinement reports +inf.
ClassNormResult a2_constant(const Potential& w, const Grid& g);

/// max over grid lines in direction v of the 1-D A2 constant along the
/// line (all subintervals). Axis directions are exact; general v samples
/// rotated lines pointwise.
ClassNormResult a2_directional(const Potential& w, const Point& v, const Grid& g);

/// Directional maximal function: per line in direction v (axis-aligned),
/// centered Hardy-Littlewood maximal of |V|^beta over all window radii,
/// then the 1/beta power. Returns a sampled potential on g.
Potential directional_maximal(const Potential& V, double beta, const Point& v,
                              const Grid& g);

}  // namespace wre
