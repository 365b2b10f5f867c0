#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wre/class_norms.hpp"
#include "wre/config.hpp"
#include "wre/estimates.hpp"
#include "wre/solver.hpp"

using namespace wre;

namespace {

// Exit-code contract: 0 pass, 1 verdict fail, 2 usage, 3 non-contraction,
// 4 resolution/precondition error.
constexpr int kPass = 0, kFail = 1, kUsage = 2, kNoContraction = 3, kPrecondition = 4;

const std::set<std::string> kCommonKeys = {
    "n", "N", "L", "Nt", "T", "seed", "mode", "out_dir", "threads", "coupling",
    "potential", "potential_a", "potential_s", "potential_gamma", "potential_r0",
    "potential_r1", "potential_center", "potential_radius", "potential_side",
    "potential_axis", "potential_v", "potential_lo", "potential_hi"};

std::set<std::string> with(std::set<std::string> s, std::initializer_list<const char*> more) {
  for (const char* k : more) s.insert(k);
  return s;
}

void check_threads(const RunConfig& c) {
  if (c.get_int("threads", 1) < 1) throw ConfigError("threads must be >= 1");
}

std::filesystem::path out_dir(const RunConfig& c) {
  std::filesystem::path d = c.get("out_dir", ".");
  std::filesystem::create_directories(d);
  return d;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

Point parse_direction(const std::string& s) {
  if (s == "e1") return {1, 0, 0};
  if (s == "e2") return {0, 1, 0};
  if (s == "e3") return {0, 0, 1};
  Point p{0, 0, 0};
  std::istringstream is(s);
  std::string tok;
  int i = 0;
  while (std::getline(is, tok, ',') && i < 3) p[i++] = std::stod(tok);
  if (i == 0) throw ConfigError("bad direction '" + s + "'");
  return p;
}

ClassNormResult norm_at(const RunConfig& c, const Grid& g) {
  Potential V = potential_from_config(c, g);
  std::string cls = c.require("class");
  if (cls == "lebesgue") return lebesgue_norm(V, c.get_double("p", 1.0), g);
  if (cls == "weak") return weak_norm(V, c.get_double("p", 1.0), g);
  if (cls == "morrey")
    return morrey_campanato_norm(V, c.get_double("alpha", 2.0), c.get_double("p", 1.0), g);
  if (cls == "kerman-sawyer") return kerman_sawyer_norm(V, c.get_double("alpha", 2.0), g);
  if (cls == "sn") return sn_bracket(V, g);
  if (cls == "kato") return kato_norm(V, g);
  if (cls == "rollnik") return rollnik_norm(V, g);
  if (cls == "a2") return a2_constant(V, g);
  if (cls == "a2-directional")
    return a2_directional(V, parse_direction(c.get("direction", "e1")), g);
  throw ConfigError("unknown class '" + cls +
                    "' (lebesgue | weak | morrey | kerman-sawyer | sn | kato | rollnik | "
                    "a2 | a2-directional)");
}

int cmd_norm(const RunConfig& c) {
  validate_keys(c, with(kCommonKeys, {"class", "alpha", "p", "direction"}));
  check_threads(c);
  Grid g = grid_from_config(c);
  ClassNormResult fine = norm_at(c, g);

  nlohmann::json j;
  j["class"] = c.require("class");
  j["grid"] = {{"n", g.n}, {"N", g.N}, {"L", g.L}};
  j["fine"] = fine.to_json();
  std::string csv = "N,value\n";
  if (g.N / 2 >= 8) {
    RunConfig cc = c;
    cc.values["N"] = std::to_string(g.N / 2);
    ClassNormResult coarse = norm_at(cc, grid_from_config(cc));
    j["coarse"] = coarse.to_json();
    char row[64];
    std::snprintf(row, sizeof row, "%d,%.17g\n", g.N / 2, coarse.value);
    csv += row;
  }
  char row[64];
  std::snprintf(row, sizeof row, "%d,%.17g\n", g.N, fine.value);
  csv += row;

  auto d = out_dir(c);
  write_text(d / "norm.json", j.dump(2) + "\n");
  write_text(d / "norm_trend.csv", csv);
  std::printf("norm class=%s N=%d value=%.12g attained=%s\n", c.require("class").c_str(),
              g.N, fine.value, fine.attained_at.c_str());
  return kPass;
}

EstimateReport run_estimate(const RunConfig& c, const std::string& id) {
  Grid g = grid_from_config(c);
  Potential V = potential_from_config(c, g);
  WeightMode mode = mode_from_config(c);
  std::uint64_t seed = static_cast<std::uint64_t>(c.get_int("seed", 1));
  SweepGrid sweep = SweepGrid::standard(g);

  if (id == "resolvent") return measure_resolvent_constant(V, g, sweep, mode, seed);
  if (id == "sn-domination") return verify_sn_domination({V}, g, sweep, mode, seed);
  if (id == "restriction-trio") return verify_restriction_trio(V, g, sweep.r, mode, seed);
  if (id == "strichartz")
    return verify_strichartz(V, g, time_from_config(c), sweep, mode, seed);
  if (id == "fefferman-phong")
    return verify_fefferman_phong(V, c.get_double("p", 1.25), g, seed);
  if (id == "carleman") {
    double bmax = c.get_double("beta_max", 8.0);
    std::vector<double> betas;
    for (double b : sweep.beta)
      if (b <= bmax) betas.push_back(b);
    return verify_carleman(V, g, time_from_config(c), betas, sweep.nu, mode, seed);
  }
  if (id == "sobolev-pd") {
    std::array<cplx, 3> cc{cplx(c.get_double("c_re", 0.7), c.get_double("c_im", 2 * g.dxi())),
                           0.0, 0.0};
    cplx z(c.get_double("z_re", 0.4), c.get_double("z_im", 1.3));
    return verify_sobolev_pd(V, cc, z, g, time_from_config(c), mode, seed);
  }
  if (id == "tlambda") {
    cplx z(c.get_double("z_re", 0.6), c.get_double("z_im", 0.8));
    return verify_tlambda_line(V, z, sweep.imlambda, g, seed);
  }
  throw ConfigError("unknown estimate '" + id +
                    "' (resolvent | sn-domination | restriction-trio | strichartz | "
                    "fefferman-phong | carleman | sobolev-pd | tlambda)");
}

const std::set<std::string> kVerifyKeys =
    with(kCommonKeys, {"estimate", "beta_max", "p", "c_re", "c_im", "z_re", "z_im"});

int cmd_verify(const RunConfig& c) {
  validate_keys(c, kVerifyKeys);
  check_threads(c);
  std::string id = c.require("estimate");
  EstimateReport rep = run_estimate(c, id);
  auto d = out_dir(c);
  write_text(d / (id + ".json"), rep.to_json().dump(2) + "\n");
  write_text(d / (id + ".csv"), rep.to_csv());
  std::printf("verify estimate=%s verdict=%s sup=%.12g slope=%.6g samples=%zu\n", id.c_str(),
              rep.verdict ? "pass" : "fail", rep.sup, rep.slope, rep.samples.size());
  return rep.verdict ? kPass : kFail;
}

int cmd_solve(const RunConfig& c) {
  validate_keys(c, with(kCommonKeys, {"tolerance", "max_iterations", "u0_width", "forcing"}));
  check_threads(c);
  Grid g = grid_from_config(c);
  TimeAxis t = time_from_config(c);
  Potential V = potential_from_config(c, g);

  SolverConfig cfg;
  cfg.max_iterations = c.get_int("max_iterations", 50);
  cfg.tolerance = c.get_double("tolerance", 1e-10);
  cfg.mode = mode_from_config(c);

  auto problem = [&](const TimeAxis& ta) {
    CauchyProblem p{g, ta, V, Field(g), Field()};
    double s = c.get_double("u0_width", 1.0);
    for (std::int64_t i = 0; i < g.points(); ++i) {
      auto x = g.point(i);
      p.u0[i] = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2 * s * s));
    }
    std::string forcing = c.get("forcing", "none");
    if (forcing == "pulse") {
      p.F = Field(g, ta);
      for (int m = 0; m < ta.Nt; ++m) {
        double env = std::exp(-(ta.node(m) - 1.0) * (ta.node(m) - 1.0));
        for (std::int64_t i = 0; i < g.points(); ++i)
          p.F[p.F.slice_offset(m) + i] = env * p.u0[i];
      }
    } else if (forcing != "none") {
      throw ConfigError("unknown forcing '" + forcing + "' (none | pulse)");
    }
    return p;
  };

  CauchyProblem p = problem(t);
  auto [u, diag] = solve_picard(p, cfg);
  auto d = out_dir(c);
  if (diag.non_contraction) {
    write_text(d / "diagnostics.json", diag.to_json().dump(2) + "\n");
    std::printf("solve non-contraction factor=%.12g\n", diag.operator_factor);
    return kNoContraction;
  }
  check_apriori_bounds(p, u, 1.0, diag, cfg.mode);

  // ratio stability under time refinement backs the exit verdict
  bool stable = true;
  if (t.Nt >= 4) {
    TimeAxis tc{t.t0, t.t1, t.Nt / 2};
    CauchyProblem pc = problem(tc);
    auto [uc, dc] = solve_picard(pc, cfg);
    check_apriori_bounds(pc, uc, 1.0, dc, cfg.mode);
    auto close = [](double a, double b) {
      return b == 0 ? a == 0 : std::fabs(a - b) <= 0.1 * std::fabs(b);
    };
    stable = dc.converged && close(dc.apriori_ratio_1, diag.apriori_ratio_1) &&
             close(dc.apriori_ratio_2, diag.apriori_ratio_2);
  }

  write_field(u, (d / "solution.field").string());
  write_text(d / "diagnostics.json", diag.to_json().dump(2) + "\n");
  bool pass = diag.converged && stable;
  std::printf("solve converged=%s iterations=%zu factor=%.12g residual=%.6g stable=%s\n",
              diag.converged ? "yes" : "no", diag.difference_history.size(),
              diag.contraction_factor, diag.residual, stable ? "yes" : "no");
  return pass ? kPass : kFail;
}

int cmd_sweep(const RunConfig& c) {
  validate_keys(c, with(kVerifyKeys, {"estimates"}));
  check_threads(c);
  std::vector<std::string> ids;
  std::istringstream is(c.get("estimates", ""));
  std::string tok;
  while (std::getline(is, tok, ','))
    if (!tok.empty()) ids.push_back(tok);
  if (ids.empty()) throw ConfigError("sweep needs a non-empty 'estimates' list");

  auto d = out_dir(c);
  nlohmann::json verdicts;
  bool all = true;
  for (const std::string& id : ids) {
    EstimateReport rep = run_estimate(c, id);
    write_text(d / (id + ".json"), rep.to_json().dump(2) + "\n");
    write_text(d / (id + ".csv"), rep.to_csv());
    verdicts[id] = rep.verdict;
    all = all && rep.verdict;
  }
  nlohmann::json j;
  j["verdicts"] = verdicts;
  j["pass"] = all;
  write_text(d / "sweep.json", j.dump(2) + "\n");
  std::printf("sweep estimates=%zu verdict=%s\n", ids.size(), all ? "pass" : "fail");
  return all ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: wrecli <norm|verify|solve|sweep> <config-file>\n");
    return kUsage;
  }
  std::string cmd = argv[1];
  try {
    RunConfig c = parse_config_file(argv[2]);
    if (cmd == "norm") return cmd_norm(c);
    if (cmd == "verify") return cmd_verify(c);
    if (cmd == "solve") return cmd_solve(c);
    if (cmd == "sweep") return cmd_sweep(c);
    std::fprintf(stderr, "unknown command '%s'\n", cmd.c_str());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "precondition error: %s\n", e.what());
    return kPrecondition;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "precondition error: %s\n", e.what());
    return kPrecondition;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kPrecondition;
  }
}
