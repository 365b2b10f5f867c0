#include "wre/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "wre/operators.hpp"
#include "wre/probe.hpp"

namespace wre {

namespace {

// Pointwise multiply by real samples; v is either a spatial array
// (broadcast over time slices) or a full space-time array.
void mul_samples(Field& u, const std::vector<double>& v) {
  const std::int64_t ns = u.spatial_size();
  if (static_cast<std::int64_t>(v.size()) == u.size()) {
    for (std::int64_t i = 0; i < u.size(); ++i) u[i] *= v[static_cast<size_t>(i)];
  } else {
    for (std::int64_t i = 0; i < u.size(); ++i) u[i] *= v[static_cast<size_t>(i % ns)];
  }
}

double weighted_norm(const Field& u, const std::vector<double>& w) {
  return l2_norm(weight_multiply(u, w, 0.5));
}

// The conjugated fixed-point map w^{1/2} Phi w^{-1/2} and its adjoint;
// its plain operator norm is the contraction factor in L2(|V|).
LinearMap phi_sandwich(std::vector<double> w, std::vector<double> vs) {
  LinearMap A;
  A.id = "picard-increment";
  A.forward = [w, vs](const Field& f) {
    Field g = weight_multiply(f, w, -0.5);
    mul_samples(g, vs);
    Field out = weight_multiply(duhamel_retarded(g), w, 0.5);
    out *= cplx(0, -1);
    return out;
  };
  A.adjoint = [w, vs](const Field& f) {
    Field g = duhamel_retarded_adjoint(weight_multiply(f, w, 0.5));
    mul_samples(g, vs);
    Field out = weight_multiply(g, w, -0.5);
    out *= cplx(0, 1);
    return out;
  };
  return A;
}

double sandwich_norm(const std::vector<double>& w, const std::vector<double>& vs,
                     const Grid& g, const TimeAxis& t, std::uint64_t seed) {
  ProbeResult pr = operator_norm(phi_sandwich(w, vs), random_field(g, t, seed), 300, 1e-10);
  return pr.norm;
}

// Residual of i du/dt + Lap u - V u - F with the time derivative taken
// spectrally on the sin^4 tapered window (the taper and its derivative
// are analytic and periodic, so only the quadrature error of u is seen).
double residual_impl(const Field& u, const Field& F, const std::vector<double>& vs) {
  const Grid& g = u.grid();
  const TimeAxis& t = *u.time();
  const double T = t.t1 - t.t0;
  const std::int64_t ns = g.points();

  std::vector<double> taper(t.Nt), dtaper(t.Nt);
  for (int m = 0; m < t.Nt; ++m) {
    double s = std::sin(M_PI * m / t.Nt);
    double c = std::cos(M_PI * m / t.Nt);
    taper[m] = s * s * s * s;
    dtaper[m] = 4.0 * M_PI / T * s * s * s * c;
  }

  Field tu = u;
  for (int m = 0; m < t.Nt; ++m)
    for (std::int64_t i = 0; i < ns; ++i) tu[tu.slice_offset(m) + i] *= taper[m];

  MultiplierSpec ddt;
  ddt.symbol = [](const std::array<double, 3>&, double tau) { return cplx(0, tau); };
  ddt.spacetime = true;
  ddt.name = "d/dt";
  Field dtu = apply_multiplier(tu, ddt);

  MultiplierSpec lap;
  lap.symbol = [](const std::array<double, 3>& xi, double) {
    return cplx(-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]), 0.0);
  };
  lap.name = "laplacian";
  Field lu = apply_multiplier(u, lap);

  const bool vfull = static_cast<std::int64_t>(vs.size()) == u.size();
  Field r(g, t);
  for (int m = 0; m < t.Nt; ++m) {
    for (std::int64_t i = 0; i < ns; ++i) {
      std::int64_t idx = r.slice_offset(m) + i;
      double v = vs.empty() ? 0.0 : vs[static_cast<size_t>(vfull ? idx : i)];
      cplx fm = F.size() ? F[idx] : cplx(0, 0);
      // taper * du/dt = D(taper u) - taper' u
      cplx tdu = dtu[idx] - dtaper[m] * u[idx];
      r[idx] = cplx(0, 1) * tdu + taper[m] * (lu[idx] - v * u[idx] - fm);
    }
  }
  return l2_norm(r);
}

// Shared Picard loop on u = free + Phi(u); Phi supplied as a closure.
Field picard_run(const Field& free_part, const std::function<Field(const Field&)>& phi,
                 const std::vector<double>& w, const SolverConfig& cfg,
                 SolutionDiagnostics& diag) {
  Field u = cfg.zero_initial_guess ? Field(free_part.grid(), *free_part.time()) : free_part;
  for (int k = 0; k < cfg.max_iterations; ++k) {
    Field next = free_part + phi(u);
    double diff = weighted_norm(next - u, w);
    double scale = weighted_norm(next, w);
    diag.difference_history.push_back(diff);
    u = std::move(next);
    if (diff <= cfg.tolerance * scale) {
      diag.converged = true;
      break;
    }
  }
  double q = 0;
  for (size_t k = 1; k < diag.difference_history.size(); ++k) {
    double prev = diag.difference_history[k - 1];
    if (prev > 0) q = std::max(q, diag.difference_history[k] / prev);
  }
  diag.contraction_factor = q;
  if (!diag.converged && q >= 1) diag.non_contraction = true;
  return u;
}

std::vector<double> real_samples(const Field& f) {
  std::vector<double> v(static_cast<size_t>(f.size()));
  for (std::int64_t i = 0; i < f.size(); ++i) v[static_cast<size_t>(i)] = f[i].real();
  return v;
}

// Exact flow of u' = -i v u - i f over time h (phi1(z) = (e^z - 1)/z).
cplx affine_kick(cplx u, double v, cplx f, double h) {
  cplx z(0, -v * h);
  cplx ez = std::exp(z);
  cplx phi1 = std::abs(z) < 1e-8 ? 1.0 + 0.5 * z : (ez - 1.0) / z;
  return ez * u - cplx(0, 1) * h * phi1 * f;
}

Field splitstep_impl(const CauchyProblem& p,
                     const std::function<double(std::int64_t, double)>& vat,
                     int substeps) {
  const Grid& g = p.grid;
  const TimeAxis& t = p.time;
  const std::int64_t ns = g.points();
  if (substeps < 1) throw std::invalid_argument("splitstep: substeps must be >= 1");

  auto f_at = [&](std::int64_t i, double time) -> cplx {
    if (!p.F.size()) return cplx(0, 0);
    double pos = (time - t.t0) / t.dt();
    int m0 = std::clamp(static_cast<int>(std::floor(pos)), 0, t.Nt - 1);
    int m1 = std::min(m0 + 1, t.Nt - 1);
    double a = pos - m0;
    return (1.0 - a) * p.F[p.F.slice_offset(m0) + i] + a * p.F[p.F.slice_offset(m1) + i];
  };

  Field out(g, t);
  std::vector<cplx> state(static_cast<size_t>(ns));
  for (std::int64_t i = 0; i < ns; ++i) state[static_cast<size_t>(i)] = p.u0[i];

  Field work(g);
  const double dtf = t.dt() / substeps;
  for (int m = 0; m < t.Nt; ++m) {
    for (std::int64_t i = 0; i < ns; ++i) out[out.slice_offset(m) + i] = state[static_cast<size_t>(i)];
    if (m == t.Nt - 1) break;
    for (int j = 0; j < substeps; ++j) {
      double s = t.node(m) + j * dtf;
      double mid = s + 0.5 * dtf;
      for (std::int64_t i = 0; i < ns; ++i) {
        size_t k = static_cast<size_t>(i);
        state[k] = affine_kick(state[k], vat(i, mid), f_at(i, mid), 0.5 * dtf);
        work[i] = state[k];
      }
      work = propagator(work, dtf);
      for (std::int64_t i = 0; i < ns; ++i) {
        size_t k = static_cast<size_t>(i);
        state[k] = affine_kick(work[i], vat(i, mid), f_at(i, mid), 0.5 * dtf);
      }
    }
  }
  return out;
}

}  // namespace

nlohmann::json SolutionDiagnostics::to_json() const {
  nlohmann::json j;
  j["difference_history"] = difference_history;
  j["contraction_factor"] = contraction_factor;
  j["operator_factor"] = operator_factor;
  j["residual"] = residual;
  j["apriori_ratio_1"] = apriori_ratio_1;
  j["apriori_ratio_2"] = apriori_ratio_2;
  j["majorant_factor"] = majorant_factor;
  j["converged"] = converged;
  j["non_contraction"] = non_contraction;
  return j;
}

Field phi_map(const Field& u, const Potential& V) {
  Field vu = u;
  mul_samples(vu, V.sample(u.grid()));
  Field out = duhamel_retarded(vu);
  out *= cplx(0, -1);
  return out;
}

Field free_solution(const CauchyProblem& p) {
  const Grid& g = p.grid;
  const TimeAxis& t = p.time;
  Field out(g, t);
  for (int m = 0; m < t.Nt; ++m) {
    Field um = propagator(p.u0, t.node(m) - t.t0);
    for (std::int64_t i = 0; i < g.points(); ++i) out[out.slice_offset(m) + i] = um[i];
  }
  if (p.F.size()) {
    Field duh = duhamel_retarded(p.F);
    duh *= cplx(0, -1);
    out += duh;
  }
  return out;
}

double contraction_factor(const Potential& V, const Grid& g, const TimeAxis& t,
                          WeightMode mode, std::uint64_t seed) {
  return sandwich_norm(weight_samples(V, g, mode), V.sample(g), g, t, seed);
}

Potential scale_coupling(const Potential& V, double c, const Grid& g) {
  std::vector<double> s = V.sample(g);
  for (double& x : s) x *= c;
  return Potential::sampled(g, std::move(s));
}

double coupling_bisection(const Potential& V, const Grid& g, const TimeAxis& t,
                          double target, WeightMode mode, std::uint64_t seed) {
  double q1 = contraction_factor(V, g, t, mode, seed);
  if (!(q1 > 0)) throw std::invalid_argument("coupling_bisection: potential has zero contraction factor");
  auto q_at = [&](double c) {
    return contraction_factor(scale_coupling(V, c, g), g, t, mode, seed);
  };
  double lo = 0.0, hi = target / q1;
  int guard = 0;
  while (q_at(hi) < target) {
    hi *= 2;
    if (++guard > 60) throw std::runtime_error("coupling_bisection: bracket expansion failed");
  }
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    double q = q_at(mid);
    if (std::abs(q - target) <= 1e-4 * target) return mid;
    (q < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::pair<Field, SolutionDiagnostics> solve_picard(const CauchyProblem& p,
                                                   const SolverConfig& cfg) {
  if (cfg.max_iterations < 1 || !(cfg.tolerance > 0) || cfg.time_quadrature_order != 2)
    throw std::invalid_argument("solve_picard: bad config");
  auto tick = std::chrono::steady_clock::now();
  const Grid& g = p.grid;
  std::vector<double> w = weight_samples(p.V, g, cfg.mode);
  std::vector<double> vs = p.V.sample(g);

  SolutionDiagnostics diag;
  diag.operator_factor = sandwich_norm(w, vs, g, p.time, 1);
  Field free_part = free_solution(p);
  if (diag.operator_factor >= 1) {
    diag.non_contraction = true;
    diag.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    return {free_part, diag};
  }

  auto phi = [&](const Field& u) { return phi_map(u, p.V); };
  Field u = picard_run(free_part, phi, w, cfg, diag);
  diag.residual = residual_impl(u, p.F, vs);
  diag.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
  return {std::move(u), diag};
}

double solve_residual(const CauchyProblem& p, const Field& u) {
  return residual_impl(u, p.F, p.V.sample(p.grid));
}

void check_apriori_bounds(const CauchyProblem& p, const Field& u, double bracket,
                          SolutionDiagnostics& diag, WeightMode mode) {
  const Grid& g = p.grid;
  std::vector<double> w = weight_samples(p.V, g, mode);
  double lhs1 = weighted_norm(u, w);
  double fw = p.F.size() ? l2_norm(weight_multiply(p.F, w, -0.5)) : 0.0;
  double u0n = l2_norm(p.u0);
  double rhs1 = std::sqrt(bracket) * u0n + bracket * fw;
  diag.apriori_ratio_1 = rhs1 > 0 ? lhs1 / rhs1 : 0.0;

  double lhs2 = 0;
  Field slice(g);
  for (int m = 0; m < p.time.Nt; ++m) {
    for (std::int64_t i = 0; i < g.points(); ++i) slice[i] = u[u.slice_offset(m) + i];
    lhs2 = std::max(lhs2, l2_norm(slice));
  }
  double rhs2 = u0n + std::sqrt(bracket) * fw;
  diag.apriori_ratio_2 = rhs2 > 0 ? lhs2 / rhs2 : 0.0;
}

Field reference_splitstep(const CauchyProblem& p, int substeps) {
  std::vector<double> vs = p.V.sample(p.grid);
  return splitstep_impl(p, [&vs](std::int64_t i, double) { return vs[static_cast<size_t>(i)]; },
                        substeps);
}

Field reference_splitstep_td(const CauchyProblem& p, const Field& Vt, int substeps) {
  const TimeAxis& t = p.time;
  std::vector<double> vs = real_samples(Vt);
  std::int64_t ns = p.grid.points();
  auto vat = [&, ns](std::int64_t i, double time) {
    double pos = (time - t.t0) / t.dt();
    int m0 = std::clamp(static_cast<int>(std::floor(pos)), 0, t.Nt - 1);
    int m1 = std::min(m0 + 1, t.Nt - 1);
    double a = pos - m0;
    return (1.0 - a) * vs[static_cast<size_t>(m0 * ns + i)] + a * vs[static_cast<size_t>(m1 * ns + i)];
  };
  return splitstep_impl(p, vat, substeps);
}

std::pair<Field, SolutionDiagnostics> solve_time_dependent(const CauchyProblem& p,
                                                           const Field& Vt,
                                                           const Potential& W,
                                                           const SolverConfig& cfg) {
  const Grid& g = p.grid;
  const TimeAxis& t = p.time;
  if (Vt.size() != std::int64_t(t.Nt) * g.points())
    throw std::invalid_argument("solve_time_dependent: potential samples do not match grid/time axis");
  std::vector<double> ws = W.sample(g);
  std::vector<double> vs = real_samples(Vt);

  // Majorant check is hard: |V(x,t)| <= W(x) at every node.
  double worst = 0;
  std::int64_t worst_idx = -1;
  for (std::int64_t idx = 0; idx < Vt.size(); ++idx) {
    double excess = std::abs(vs[static_cast<size_t>(idx)]) -
                    std::abs(ws[static_cast<size_t>(idx % g.points())]);
    if (excess > worst) { worst = excess; worst_idx = idx; }
  }
  if (worst_idx >= 0 && worst > 1e-12 * (1.0 + std::abs(ws[static_cast<size_t>(worst_idx % g.points())]))) {
    auto x = g.point(worst_idx % g.points());
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "majorant violated at x=(%g, %g, %g), t=%g: |V|=%g > W=%g",
                  x[0], x[1], x[2], t.node(static_cast<int>(worst_idx / g.points())),
                  std::abs(vs[static_cast<size_t>(worst_idx)]),
                  std::abs(ws[static_cast<size_t>(worst_idx % g.points())]));
    throw std::invalid_argument(buf);
  }

  auto tick = std::chrono::steady_clock::now();
  std::vector<double> w = weight_samples(W, g, cfg.mode);

  SolutionDiagnostics diag;
  diag.operator_factor = sandwich_norm(w, vs, g, t, 1);
  diag.majorant_factor = sandwich_norm(w, ws, g, t, 1);
  Field free_part = free_solution(p);
  if (diag.operator_factor >= 1) {
    diag.non_contraction = true;
    diag.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
    return {free_part, diag};
  }

  auto phi = [&](const Field& u) {
    Field vu = u;
    mul_samples(vu, vs);
    Field out = duhamel_retarded(vu);
    out *= cplx(0, -1);
    return out;
  };
  Field u = picard_run(free_part, phi, w, cfg, diag);
  diag.residual = residual_impl(u, p.F, vs);
  diag.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - tick).count();
  return {std::move(u), diag};
}

}  // namespace wre
