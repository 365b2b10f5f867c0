// Acceptance harness: one pass/fail line per criterion, nonzero exit on
// any failure. Each check is independent and desk-scale.
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wre/class_norms.hpp"
#include "wre/dyadic.hpp"
#include "wre/estimates.hpp"
#include "wre/kernels.hpp"
#include "wre/operators.hpp"
#include "wre/probe.hpp"
#include "wre/solver.hpp"

using namespace wre;

namespace {

int g_failures = 0;

void run(int num, const char* name, const std::function<bool()>& check) {
  bool ok = false;
  std::string note;
  try {
    ok = check();
  } catch (const std::exception& e) {
    note = std::string(" (") + e.what() + ")";
  }
  std::printf("criterion %2d  %-44s %s%s\n", num, name, ok ? "pass" : "FAIL", note.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

bool close(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::fabs(b); }

Field gaussian_u0(const Grid& g, double s) {
  Field f(g);
  for (std::int64_t i = 0; i < g.points(); ++i) {
    auto x = g.point(i);
    f[i] = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * s * s));
  }
  return f;
}

double final_slice_rel_err(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  int m = a.time()->Nt - 1;
  double num = 0, den = 0;
  for (std::int64_t i = 0; i < g.points(); ++i) {
    num += std::norm(a[a.slice_offset(m) + i] - b[b.slice_offset(m) + i]);
    den += std::norm(b[b.slice_offset(m) + i]);
  }
  return std::sqrt(num / den);
}

// Shared reports, reused by the determinism criterion.
std::map<std::string, std::string> g_reports;

}  // namespace

// 1. Power-iteration constants match the dense singular-value oracle.
static bool c1_dense_oracle() {
  Grid g(1, 64, 8.0);
  // off-center component breaks the parity near-degeneracy of the top
  // singular pair, which would stall the power iteration
  Potential V = Potential::sum(
      {Potential::gaussian(2.0, 1.0), Potential::ball(0.8, {0.9, 0, 0}, 0.6)});
  auto sweep = SweepGrid::standard(g);
  sweep.z.resize(3);
  auto rep = measure_resolvent_constant(V, g, sweep);
  for (size_t i = 0; i < sweep.z.size(); ++i) {
    auto A = weighted_resolvent_map(V, g, sweep.z[i], WeightMode::support_restricted);
    double exact = dense_operator_norm(dense_matrix(A.forward, g), g.N, g.N);
    if (!close(rep.samples[i].constant, exact, 1e-6)) return false;
  }
  return true;
}

// 2. Kerman-Sawyer sup equals brute-force enumeration over every cube of
// the depth <= 3 family and every cell pair.
static bool c2_ks_bruteforce() {
  Grid g(2, 32, 8.0);
  Potential V = Potential::sum({Potential::gaussian(1.5, 1.2),
                                Potential::ball(0.8, {2.0, -1.0, 0.0}, 1.5)});
  double alpha = 1.0, beta = g.n - alpha;
  auto ks = kerman_sawyer_norm(V, alpha, g);
  if (!std::isfinite(ks.value)) return false;

  std::vector<double> s = V.sample(g);
  for (double& v : s) v = std::fabs(v);
  double hn = std::pow(g.h(), g.n);
  DyadicCubeSet cubes(g, 0, 3, true);
  double best = 0;
  for (const Cube& q : cubes.cubes()) {
    std::vector<std::int64_t> idx;
    for (int i0 = 0; i0 < q.cells; ++i0)
      for (int i1 = 0; i1 < q.cells; ++i1)
        idx.push_back(std::int64_t(q.lo[0] + i0) * g.N + (q.lo[1] + i1));
    double mass = 0;
    for (auto t : idx) mass += s[size_t(t)];
    mass *= hn;
    if (mass <= 0) continue;
    double cross = 0;
    for (size_t a = 0; a < idx.size(); ++a) {
      if (s[size_t(idx[a])] == 0) continue;
      for (size_t b = 0; b < idx.size(); ++b) {
        if (s[size_t(idx[b])] == 0) continue;
        std::array<int, 3> d{int(idx[a] / g.N) - int(idx[b] / g.N),
                             int(idx[a] % g.N) - int(idx[b] % g.N), 0};
        d[0] = std::abs(d[0]);
        d[1] = std::abs(d[1]);
        cross += s[size_t(idx[a])] * s[size_t(idx[b])] * cell_pair_kernel(g.n, beta, d, g.h());
      }
    }
    cross *= hn * hn;
    best = std::max(best, cross / mass);
  }
  return std::fabs(ks.value - best) <= 1e-10 * best;
}

// 3. Scaling invariance of the bracket on covariantly transported grids.
static bool c3_sn_scaling() {
  Potential V = Potential::inverse_square(1.0, 0.25, 2.0);
  double base = 0;
  std::vector<double> lams{0.25, 0.5, 1.0, 2.0, 4.0};
  for (double lam : lams) {
    Grid g(3, 16, 4.0 / lam);
    double v = sn_bracket(V.scaled(lam), g).value;
    if (!std::isfinite(v) || v <= 0) return false;
    if (lam == 1.0) base = v;
  }
  for (double lam : lams) {
    Grid g(3, 16, 4.0 / lam);
    if (!close(sn_bracket(V.scaled(lam), g).value, base, 0.05)) return false;
  }
  return true;
}

// 4. Inclusion chain over a 10-potential family: bracket dominated by the
// Morrey-Campanato gauge with the ratio frozen at the coarse grid, and
// Kato/Rollnik-finite members have finite brackets.
static bool c4_inclusion_chain() {
  // every member must be resolved already at N = 8 (h = 1), or the
  // refinement-trend divergence guard reads the coarse under-resolution
  // as a genuine blowup
  std::vector<Potential> family{
      Potential::gaussian(1.0, 1.0),
      Potential::gaussian(2.0, 0.6),
      Potential::ball(1.0, {-0.3, 0.4, 0.2}, 1.3),
      Potential::ball(1.5, {0.5, 0.2, 0.0}, 0.8),
      Potential::cube(1.0, {0.4, -0.3, 0.2}, 2.2),
      Potential::inverse_square(1.0, 0.3, 2.0),
      Potential::inverse_square(0.5, 0.2, 1.6),
      Potential::power(1.0, 1.5, 0.2, 2.0),
      Potential::strip(0.5, {1, 0, 0}, -0.8, 0.8),
      Potential::constant(0.25)};
  double p = 1.25;  // (n-1)/2 + 1/4 at n = 3

  Grid coarse(3, 8, 4.0), fine(3, 16, 4.0);
  double kappa = 0;
  for (const Potential& V : family) {
    double sn = sn_bracket(V, coarse).value;
    double mc = morrey_campanato_norm(V, 2.0, p, coarse).value;
    if (!std::isfinite(sn) || !std::isfinite(mc) || mc <= 0) return false;
    kappa = std::max(kappa, sn / mc);
  }
  for (const Potential& V : family) {
    double sn = sn_bracket(V, fine).value;
    double mc = morrey_campanato_norm(V, 2.0, p, fine).value;
    if (!std::isfinite(sn) || !std::isfinite(mc)) return false;
    if (sn > kappa * mc * 1.05) return false;
  }
  // Kato/Rollnik-finite => finite bracket
  for (const Potential& V : family) {
    if (std::isfinite(kato_norm(V, fine).value) && std::isfinite(rollnik_norm(V, fine).value) &&
        !std::isfinite(sn_bracket(V, fine).value))
      return false;
  }
  return true;
}

// 5. Resolvent constant linear in the coupling of the inverse-square.
static bool c5_kato_yajima() {
  Grid g(2, 32, 8.0);
  auto sweep = SweepGrid::standard(g);
  sweep.z.resize(3);
  double base = 0;
  for (double a : {1.0, 2.0, 4.0, 8.0}) {
    auto rep = measure_resolvent_constant(Potential::inverse_square(a, 0.25, 3.0), g, sweep);
    if (a == 1.0) {
      base = rep.sup;
      g_reports["resolvent"] = rep.to_json().dump();
    }
    if (!close(rep.sup, a * base, 0.05)) return false;
  }
  return base > 0;
}

// 6. Restriction trio identities, r^{1/2} trend, and refinement-stable
// domination by the resolvent constant.
static bool c6_restriction_trio() {
  Grid g(2, 32, 8.0);
  auto zsweep = SweepGrid::standard(g);
  auto r_sweep = zsweep.r;

  // identities and the r^{1/2} trend need the scale-covariant weight
  Potential V = Potential::inverse_square(1.0, 0.0, std::numeric_limits<double>::infinity());
  auto rep = verify_restriction_trio(V, g, r_sweep);
  g_reports["restriction-trio"] = rep.to_json().dump();
  if (!rep.verdict) return false;
  if (rep.extra["worst_duality_err"] > 1e-6 || rep.extra["worst_ttstar_err"] > 1e-6) return false;
  if (std::fabs(rep.slope - 0.5) > 0.1) return false;

  // kappa refinement stability on a weight the coarse grid already
  // resolves, with the resolvent sup measured over one shared z sweep
  Potential W = Potential::gaussian(1.0, 1.5);
  double kext[2], kconv[2];
  int idx = 0;
  for (int N : {32, 64}) {
    Grid gn(2, N, 8.0);
    auto rn = verify_restriction_trio(W, gn, r_sweep);
    double cres = measure_resolvent_constant(W, gn, zsweep).sup;
    if (!(cres > 0)) return false;
    kext[idx] = kconv[idx] = 0;
    for (auto& s : rn.samples) {
      double r = s.params.at("r");
      kext[idx] = std::max(kext[idx], s.constant / std::sqrt(r * cres));
      kconv[idx] = std::max(kconv[idx], s.params.at("c_conv") / (r * cres));
    }
    ++idx;
  }
  return close(kext[1], kext[0], 0.10) && close(kconv[1], kconv[0], 0.10);
}

// 7. Endpoint exactness of the analytic family on the imaginary axis.
static bool c7_endpoint() {
  Grid g(3, 16, 4.0);
  auto rep = verify_tlambda_line(Potential::inverse_square(1.0, 0.3, 2.0), cplx(0.6, 0.8),
                                 SweepGrid::standard(g).imlambda, g);
  return rep.verdict && rep.extra["endpoint_trials"] >= 200 &&
         rep.extra["endpoint_violations"] == 0;
}

// 8. Bessel-kernel bounds and critical-line domination with the constants
// calibrated on the coarse sample and then frozen.
static bool c8_kernel_bounds() {
  const int n = 3;
  std::vector<double> ims{0.0, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0};
  std::vector<cplx> zs{{0.0, 1.0}, {0.0, 2.0}, {0.5, 1.5}, {-1.0, 1.0}};

  auto radii = [](int count) {
    std::vector<double> r;
    for (int i = 0; i < count; ++i)
      r.push_back(0.02 * std::pow(10.0 / 0.02, double(i) / (count - 1)));
    return r;
  };

  auto sweep_max = [&](const std::vector<double>& rs, double* m21, double* m22, double* mc) {
    *m21 = *m22 = *mc = 0;
    for (double im : ims) {
      cplx lam(0.5 * (n - 1), im);
      cplx nu = cplx(0.5 * n, 0) - lam;
      for (cplx z : zs) {
        for (double r : rs) {
          cplx w = std::sqrt(z) * r;
          cplx B = bessel_k(nu, w);
          if (std::abs(w) <= 1.0) {
            double v = std::abs(std::exp(nu * nu) * nu * B) *
                       std::pow(std::abs(w), std::fabs(nu.real()));
            *m21 = std::max(*m21, v);
          }
          if (std::abs(w) >= 1.0) {
            double v = std::abs(B) * std::exp(w.real()) * std::sqrt(std::abs(w));
            *m22 = std::max(*m22, v);
          }
          double K = std::abs(power_resolvent_kernel(n, lam, z, r));
          *mc = std::max(*mc, K * r * std::exp(-0.5 * M_PI * std::fabs(im)));
        }
      }
    }
  };

  double k21, k22, kc;
  sweep_max(radii(9), &k21, &k22, &kc);  // calibrate coarse, freeze
  if (!(k21 > 0) || !(k22 > 0) || !(kc > 0)) return false;
  double f21, f22, fc;
  sweep_max(radii(65), &f21, &f22, &fc);
  return f21 <= 1.05 * k21 && f22 <= 1.05 * k22 && fc <= 1.05 * kc;
}

// 9. Squared homogeneous and Duhamel constants dominated by the resolvent
// sup with refinement-stable factors.
static bool c9_smoothing_chain() {
  Potential V = Potential::gaussian(1.0, 1.5);
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 8.0, 32};
  auto sweep = SweepGrid::standard(g);
  sweep.z.resize(4);
  auto rep = verify_strichartz(V, g, t, sweep);
  g_reports["strichartz"] = rep.to_json().dump();
  if (!rep.verdict) return false;
  double kh = rep.extra["kappa_homogeneous"], kd = rep.extra["kappa_duhamel"];
  if (!(kh > 0) || !(kd > 0)) return false;

  auto fine = verify_strichartz(V, Grid(2, 32, 6.0), t, sweep);
  return close(fine.extra["kappa_homogeneous"], kh, 0.10) &&
         close(fine.extra["kappa_duhamel"], kd, 0.10);
}

// 10. Weak limiting absorption: pairing convergence, jump relation, and
// the weighted boundary bound against the interior sup.
static bool c10_weak_limit() {
  Grid g(3, 32, 6.0);
  double lambda = 9.0;
  Potential V = Potential::gaussian(1.0, 1.5);
  Field f(g), h(g);
  for (std::int64_t j = 0; j < f.size(); ++j) {
    auto x = g.point(j);
    double a0 = x[0] - 0.6, a1 = x[1] + 0.4, a2 = x[2] - 0.3;
    f[j] = std::exp(-(a0 * a0 + a1 * a1 + a2 * a2) / (2.0 * 1.1 * 1.1));
    double b0 = x[0] + 0.8, b1 = x[1] - 0.5, b2 = x[2] + 0.2;
    h[j] = std::exp(-(b0 * b0 + b1 * b1 + b2 * b2) / (2.0 * 1.4 * 1.4));
  }
  SweepGrid sweep;
  sweep.z = {cplx(lambda, 2.2), cplx(lambda, -2.2), cplx(lambda, 4.4)};
  double csup = measure_resolvent_constant(V, g, sweep).sup;
  auto rec = measure_weak_limit(V, f, h, lambda, +1, {1.0, 0.5, 0.25, 0.125}, csup);
  return rec.limit_rel_err < 0.01 && rec.jump_rel_err < 0.05 && rec.weighted_ratio < 1.05;
}

// 11. Carleman uniformity for the strip indicator and the truncated
// inverse-square across the full (beta, nu) sweep.
static bool c11_carleman() {
  // band wide enough to resolve the characteristic variety up to beta = 8:
  // spatial nyquist ~ 16.8 > beta_max, tau band ~ 80 > beta_max^2
  Grid g(2, 32, 3.0);
  TimeAxis t{0.0, 2.5, 64};
  auto sweep = SweepGrid::standard(g);
  bool first = true;
  for (const Potential& V : {Potential::strip(1.0, {1, 0, 0}, -1.0, 1.0),
                             Potential::inverse_square(1.0, 0.3, 2.0)}) {
    auto rep = verify_carleman(V, g, t, sweep.beta, sweep.nu, WeightMode::floor_regularized);
    if (first) {
      g_reports["carleman"] = rep.to_json().dump();
      first = false;
    }
    if (!rep.verdict) return false;
    if (std::fabs(rep.slope) > 0.1) return false;
    if (rep.extra["sup_over_inf"] > 3.0) return false;
    int measured = 0;
    for (const auto& s : rep.samples)
      if (!s.skipped) ++measured;
    if (measured < int(sweep.beta.size() * sweep.nu.size()) - 4) return false;
  }
  return true;
}

// 12. Picard contraction: bisected coupling, geometric convergence,
// second-order residual, oracle agreement, stable ratios, uniqueness.
static bool c12_picard() {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 64};
  Potential V = Potential::inverse_square(1.0, 0.4, 3.0);

  double cstar = coupling_bisection(V, g, t, 0.5);
  double q = contraction_factor(scale_coupling(V, cstar, g), g, t);
  if (q < 0.45 || q > 0.55) return false;

  Potential Vh = scale_coupling(V, 0.5 * cstar, g);
  SolverConfig cfg;
  CauchyProblem p{g, t, Vh, gaussian_u0(g, 1.0), Field()};
  auto [u, diag] = solve_picard(p, cfg);
  if (!diag.converged || diag.contraction_factor >= 0.5) return false;
  for (size_t k = 1; k < diag.difference_history.size(); ++k)
    if (diag.difference_history[k] >
        diag.contraction_factor * diag.difference_history[k - 1] * (1 + 1e-6))
      return false;

  // residual second order in dt
  CauchyProblem p2{g, TimeAxis{0.0, 4.0, 128}, Vh, p.u0, Field()};
  auto [u2, d2] = solve_picard(p2, cfg);
  double ratio = diag.residual / d2.residual;
  if (ratio < 2.8 || ratio > 6.0) return false;

  // split-step oracle agreement at 1e-4
  CauchyProblem p3{g, TimeAxis{0.0, 2.0, 128}, Vh, p.u0, Field()};
  auto [u3, d3] = solve_picard(p3, cfg);
  if (!d3.converged || final_slice_rel_err(u3, reference_splitstep(p3, 8)) > 1e-4) return false;

  // a-priori ratios stable under spatial refinement
  double r1[2], r2[2];
  int Ns[2] = {16, 32};
  for (int j = 0; j < 2; ++j) {
    Grid gj(2, Ns[j], 6.0);
    CauchyProblem pj{gj, t, V, gaussian_u0(gj, 1.0), Field()};
    pj.V = scale_coupling(V, 0.5 * cstar, gj);
    auto [uj, dj] = solve_picard(pj, cfg);
    if (!dj.converged) return false;
    check_apriori_bounds(pj, uj, 1.0, dj);
    r1[j] = dj.apriori_ratio_1;
    r2[j] = dj.apriori_ratio_2;
  }
  if (!close(r1[1], r1[0], 0.10) || !close(r2[1], r2[0], 0.10)) return false;

  // uniqueness surrogate: cold start agrees to 10 * tolerance
  SolverConfig cold = cfg;
  cold.zero_initial_guess = true;
  auto [uc, dc] = solve_picard(p, cold);
  auto w = weight_samples(Vh, g, cfg.mode);
  double d = l2_norm(weight_multiply(uc - u, w, 0.5));
  return dc.converged && d < 10 * cfg.tolerance * l2_norm(weight_multiply(u, w, 0.5));
}

// 13. Time-dependent majorant: hard pointwise check, factor domination,
// constant-in-time consistency.
static bool c13_time_dependent() {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 64};
  Potential V0 = Potential::gaussian(0.8, 1.5);
  auto v0s = V0.sample(g);

  Field Vconst(g, t), Vosc(g, t);
  for (int m = 0; m < t.Nt; ++m)
    for (std::int64_t i = 0; i < g.points(); ++i) {
      Vconst[Vconst.slice_offset(m) + i] = v0s[size_t(i)];
      Vosc[Vosc.slice_offset(m) + i] = std::cos(t.node(m)) * v0s[size_t(i)];
    }
  CauchyProblem p{g, t, V0, gaussian_u0(g, 1.0), Field()};
  auto [us, ds] = solve_picard(p);
  auto [ut, dt] = solve_time_dependent(p, Vconst, V0, SolverConfig{});
  if (!ds.converged || !dt.converged) return false;
  if (l2_norm(ut - us) > 1e-12 * l2_norm(us)) return false;

  auto [uo, do_] = solve_time_dependent(p, Vosc, V0, SolverConfig{});
  if (!do_.converged) return false;
  if (do_.operator_factor > do_.majorant_factor * (1 + 1e-6)) return false;

  Field Vbad = Vosc;
  Vbad[17] = 100.0;
  try {
    solve_time_dependent(p, Vbad, V0, SolverConfig{});
    return false;
  } catch (const std::invalid_argument&) {
    return true;
  }
}

// 14. The report-producing sweeps rerun with the same seeds are
// byte-identical.
static bool c14_determinism() {
  if (g_reports.size() != 4) return false;
  {
    Grid g(2, 32, 8.0);
    auto sweep = SweepGrid::standard(g);
    sweep.z.resize(3);
    auto rep = measure_resolvent_constant(Potential::inverse_square(1.0, 0.25, 3.0), g, sweep);
    if (rep.to_json().dump() != g_reports["resolvent"]) return false;
  }
  {
    Grid g(2, 32, 8.0);
    Potential V = Potential::inverse_square(1.0, 0.0, std::numeric_limits<double>::infinity());
    auto rep = verify_restriction_trio(V, g, SweepGrid::standard(g).r);
    if (rep.to_json().dump() != g_reports["restriction-trio"]) return false;
  }
  {
    Grid g(2, 16, 6.0);
    auto sweep = SweepGrid::standard(g);
    sweep.z.resize(4);
    auto rep = verify_strichartz(Potential::gaussian(1.0, 1.5), g, TimeAxis{0.0, 8.0, 32}, sweep);
    if (rep.to_json().dump() != g_reports["strichartz"]) return false;
  }
  {
    Grid g(2, 32, 3.0);
    auto sweep = SweepGrid::standard(g);
    auto rep = verify_carleman(Potential::strip(1.0, {1, 0, 0}, -1.0, 1.0), g,
                               TimeAxis{0.0, 2.5, 64}, sweep.beta, sweep.nu,
                               WeightMode::floor_regularized);
    if (rep.to_json().dump() != g_reports["carleman"]) return false;
  }
  return true;
}

int main() {
  run(1, "dense singular-value oracle", c1_dense_oracle);
  run(2, "Kerman-Sawyer brute force", c2_ks_bruteforce);
  run(3, "bracket scaling invariance", c3_sn_scaling);
  run(4, "class inclusion chain", c4_inclusion_chain);
  run(5, "Kato-Yajima coupling linearity", c5_kato_yajima);
  run(6, "restriction trio", c6_restriction_trio);
  run(7, "endpoint exactness", c7_endpoint);
  run(8, "kernel bounds", c8_kernel_bounds);
  run(9, "smoothing chain", c9_smoothing_chain);
  run(10, "weak limiting absorption", c10_weak_limit);
  run(11, "Carleman uniformity", c11_carleman);
  run(12, "Picard contraction", c12_picard);
  run(13, "time-dependent majorant", c13_time_dependent);
  run(14, "determinism", c14_determinism);
  if (g_failures) std::printf("%d criterion(s) FAILED\n", g_failures);
  return g_failures ? 1 : 0;
}
