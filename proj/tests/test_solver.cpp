#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "wre/operators.hpp"
#include "wre/probe.hpp"
#include "wre/solver.hpp"

using namespace wre;

namespace {

Field gaussian_u0(const Grid& g, double s) {
  Field f(g);
  for (std::int64_t i = 0; i < g.points(); ++i) {
    auto x = g.point(i);
    double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    f[i] = std::exp(-r2 / (2 * s * s));
  }
  return f;
}

Field forcing_pulse(const Grid& g, const TimeAxis& t) {
  Field F(g, t);
  for (int m = 0; m < t.Nt; ++m) {
    double env = std::exp(-(t.node(m) - 1.0) * (t.node(m) - 1.0));
    for (std::int64_t i = 0; i < g.points(); ++i) {
      auto x = g.point(i);
      double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      F[F.slice_offset(m) + i] = env * std::exp(-r2) * cplx(0.3, 0.1);
    }
  }
  return F;
}

double final_slice_rel_err(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  int m = a.time()->Nt - 1;
  Field da(g), bb(g);
  for (std::int64_t i = 0; i < g.points(); ++i) {
    da[i] = a[a.slice_offset(m) + i] - b[b.slice_offset(m) + i];
    bb[i] = b[b.slice_offset(m) + i];
  }
  return l2_norm(da) / l2_norm(bb);
}

}  // namespace

TEST_CASE("fixed-point increment is linear and vanishes trivially") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 32};
  Potential V = Potential::gaussian(1.0, 1.5);

  Field zero(g, t);
  CHECK(l2_norm(phi_map(zero, V)) == 0.0);

  Field u = random_field(g, t, 5);
  CHECK(l2_norm(phi_map(u, Potential())) == 0.0);

  Field v = random_field(g, t, 6);
  Field lhs = phi_map(u + cplx(2.0, -1.0) * v, V);
  Field rhs = phi_map(u, V) + cplx(2.0, -1.0) * phi_map(v, V);
  CHECK(l2_norm(lhs - rhs) < 1e-12 * l2_norm(lhs));
}

TEST_CASE("zero potential reproduces free evolution in one sweep") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 32};
  CauchyProblem p{g, t, Potential(), gaussian_u0(g, 1.0), Field()};
  auto [u, diag] = solve_picard(p);

  CHECK(diag.converged);
  CHECK(diag.difference_history.size() == 1);
  CHECK(diag.operator_factor == 0.0);

  double err = 0;
  for (int m = 0; m < t.Nt; ++m) {
    Field um = propagator(p.u0, t.node(m));
    for (std::int64_t i = 0; i < g.points(); ++i)
      err = std::max(err, std::abs(u[u.slice_offset(m) + i] - um[i]));
  }
  CHECK(err < 1e-12);

  // the sup-in-time bound is an exact isometry here
  SolutionDiagnostics d2;
  check_apriori_bounds(p, u, 1.0, d2);
  CHECK(d2.apriori_ratio_2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("contraction factor is homogeneous in the coupling") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 32};
  Potential V = Potential::gaussian(1.0, 1.5);

  CHECK(contraction_factor(Potential(), g, t) == 0.0);

  double q1 = contraction_factor(V, g, t);
  double q3 = contraction_factor(scale_coupling(V, 3.0, g), g, t);
  CHECK(q1 > 0);
  CHECK(std::fabs(q3 - 3.0 * q1) < 1e-8 * q3);
}

TEST_CASE("coupling bisection brackets the half-contraction point") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 32};
  Potential V = Potential::gaussian(1.0, 1.5);

  double cstar = coupling_bisection(V, g, t, 0.5);
  double q = contraction_factor(scale_coupling(V, cstar, g), g, t);
  CHECK(q > 0.45);
  CHECK(q < 0.55);

  CHECK_THROWS_AS(coupling_bisection(Potential(), g, t), std::invalid_argument);

  // at half the critical coupling the iteration contracts geometrically
  CauchyProblem p{g, t, scale_coupling(V, 0.5 * cstar, g), gaussian_u0(g, 1.0),
                  forcing_pulse(g, t)};
  SolverConfig cfg;
  auto [u, diag] = solve_picard(p, cfg);
  CHECK(diag.converged);
  CHECK(diag.contraction_factor < 0.5);
  for (size_t k = 1; k < diag.difference_history.size(); ++k)
    CHECK(diag.difference_history[k] <=
          diag.contraction_factor * diag.difference_history[k - 1] * (1 + 1e-6));

  // fixed-point property in the weighted norm
  Field resid = u - (free_solution(p) + phi_map(u, p.V));
  auto w = weight_samples(p.V, g, cfg.mode);
  double fp = l2_norm(weight_multiply(resid, w, 0.5));
  CHECK(fp <= cfg.tolerance * l2_norm(weight_multiply(u, w, 0.5)));

  // uniqueness surrogate: a cold start lands on the same fixed point
  SolverConfig cold = cfg;
  cold.zero_initial_guess = true;
  auto [u2, diag2] = solve_picard(p, cold);
  CHECK(diag2.converged);
  double d = l2_norm(weight_multiply(u2 - u, w, 0.5));
  CHECK(d < 10 * cfg.tolerance * l2_norm(weight_multiply(u, w, 0.5)));
}

TEST_CASE("over-coupled potential yields a divergence diagnosis") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 32};
  Potential V = Potential::gaussian(1.0, 1.5);
  double cstar = coupling_bisection(V, g, t, 0.5);

  CauchyProblem p{g, t, scale_coupling(V, 4.0 * cstar, g), gaussian_u0(g, 1.0), Field()};
  auto [u, diag] = solve_picard(p);
  CHECK(diag.non_contraction);
  CHECK_FALSE(diag.converged);
  CHECK(diag.operator_factor >= 1.0);
}

TEST_CASE("split-step oracle: free limit and second-order self-convergence") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 2.0, 16};
  Potential V = Potential::inverse_square(0.4, 0.5, 3.0);
  CauchyProblem p{g, t, V, gaussian_u0(g, 1.0), Field()};

  CauchyProblem pfree{g, t, Potential(), p.u0, Field()};
  Field sfree = reference_splitstep(pfree, 4);
  double err = 0;
  for (int m = 0; m < t.Nt; ++m) {
    Field um = propagator(p.u0, t.node(m));
    for (std::int64_t i = 0; i < g.points(); ++i)
      err = std::max(err, std::abs(sfree[sfree.slice_offset(m) + i] - um[i]));
  }
  CHECK(err < 1e-12);

  Field ref = reference_splitstep(p, 64);
  double e2 = final_slice_rel_err(reference_splitstep(p, 2), ref);
  double e4 = final_slice_rel_err(reference_splitstep(p, 4), ref);
  double order = std::log2(e2 / e4);
  CHECK(order > 1.6);
  CHECK(order < 2.4);
}

TEST_CASE("picard solution agrees with the split-step oracle") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 2.0, 128};
  Potential V = Potential::inverse_square(0.4, 0.5, 3.0);
  CauchyProblem p{g, t, V, gaussian_u0(g, 1.0), forcing_pulse(g, t)};

  auto [u, diag] = solve_picard(p);
  CHECK(diag.converged);
  Field ref = reference_splitstep(p, 8);
  CHECK(final_slice_rel_err(u, ref) < 1e-4);
}

TEST_CASE("residual decays at second order in the time step") {
  Grid g(2, 16, 6.0);
  Potential V = Potential::inverse_square(0.4, 0.5, 3.0);
  Field u0 = gaussian_u0(g, 1.0);

  std::array<double, 2> res{};
  std::array<int, 2> nts{64, 128};
  for (int j = 0; j < 2; ++j) {
    TimeAxis t{0.0, 2.0, nts[j]};
    CauchyProblem p{g, t, V, u0, Field()};
    auto [u, diag] = solve_picard(p);
    REQUIRE(diag.converged);
    res[j] = diag.residual;
  }
  double ratio = res[0] / res[1];
  CHECK(ratio > 2.8);
  CHECK(ratio < 6.0);
}

TEST_CASE("a-priori ratios and the continuity modulus are refinement-stable") {
  Potential V = Potential::gaussian(0.6, 1.5);
  std::array<double, 2> r1{}, r2{};
  std::array<int, 2> ns{16, 32};
  for (int j = 0; j < 2; ++j) {
    Grid g(2, ns[j], 6.0);
    TimeAxis t{0.0, 4.0, 32};
    CauchyProblem p{g, t, V, gaussian_u0(g, 1.0), forcing_pulse(g, t)};
    auto [u, diag] = solve_picard(p);
    REQUIRE(diag.converged);
    check_apriori_bounds(p, u, 1.0, diag);
    r1[j] = diag.apriori_ratio_1;
    r2[j] = diag.apriori_ratio_2;

    // discrete modulus of continuity of t -> ||u(t)||_2 stays bounded
    Field slice(g);
    double prev = -1, modulus = 0, supn = 0;
    for (int m = 0; m < t.Nt; ++m) {
      for (std::int64_t i = 0; i < g.points(); ++i) slice[i] = u[u.slice_offset(m) + i];
      double nm = l2_norm(slice);
      supn = std::max(supn, nm);
      if (prev >= 0) modulus = std::max(modulus, std::fabs(nm - prev));
      prev = nm;
    }
    CHECK(modulus < 2.0 * t.dt() * supn);
  }
  CHECK(std::fabs(r1[1] - r1[0]) < 0.1 * r1[0]);
  CHECK(std::fabs(r2[1] - r2[0]) < 0.1 * r2[0]);
}

TEST_CASE("time-dependent potential under a majorant") {
  Grid g(2, 16, 6.0);
  TimeAxis t{0.0, 4.0, 160};
  Potential V0 = Potential::gaussian(0.8, 1.5);
  auto v0s = V0.sample(g);

  // constant-in-time samples reproduce the static solver exactly
  Field Vt(g, t);
  for (int m = 0; m < t.Nt; ++m)
    for (std::int64_t i = 0; i < g.points(); ++i)
      Vt[Vt.slice_offset(m) + i] = v0s[static_cast<size_t>(i)];
  CauchyProblem p{g, t, V0, gaussian_u0(g, 1.0), Field()};
  auto [us, ds] = solve_picard(p);
  auto [ut, dt] = solve_time_dependent(p, Vt, V0, SolverConfig{});
  REQUIRE(ds.converged);
  REQUIRE(dt.converged);
  CHECK(l2_norm(ut - us) < 1e-12 * l2_norm(us));

  // oscillating coupling: factor dominated by the majorant's
  Field Vosc(g, t);
  for (int m = 0; m < t.Nt; ++m)
    for (std::int64_t i = 0; i < g.points(); ++i)
      Vosc[Vosc.slice_offset(m) + i] = std::cos(t.node(m)) * v0s[static_cast<size_t>(i)];
  auto [uo, do_] = solve_time_dependent(p, Vosc, V0, SolverConfig{});
  CHECK(do_.converged);
  CHECK(do_.operator_factor <= do_.majorant_factor * (1 + 1e-6));

  // oracle agreement for the oscillating case
  Field ref = reference_splitstep_td(p, Vosc, 8);
  CHECK(final_slice_rel_err(uo, ref) < 1e-4);

  // majorant violations are a hard error naming the worst point
  Field Vbad = Vosc;
  Vbad[Vbad.slice_offset(3) + 5] = 100.0;
  CHECK_THROWS_WITH_AS(solve_time_dependent(p, Vbad, V0, SolverConfig{}),
                       doctest::Contains("majorant violated"), std::invalid_argument);
}
