#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wre/grid.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "wre_cli_test";

struct Setup {
  Setup() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
} setup;

void write_config(const std::string& name, const std::string& text) {
  std::ofstream out(kWork / name);
  out << text;
}

int run(const std::string& args, const std::string& stdout_file = "stdout.txt") {
  std::string cmd = std::string(WRE_CLI_PATH) + " " + args + " > " +
                    (kWork / stdout_file).string() + " 2> " + (kWork / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int line_count(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string cfg_path(const std::string& name) { return (kWork / name).string(); }

}  // namespace

TEST_CASE("usage errors carry exit code 2") {
  CHECK(run("") == 2);
  write_config("ok.cfg", "n = 1\nN = 32\nL = 8\nclass = lebesgue\n");
  CHECK(run("frobnicate " + cfg_path("ok.cfg")) == 2);
  CHECK(run("norm " + cfg_path("no_such_file.cfg")) == 2);

  write_config("unknown.cfg", "n = 1\nN = 32\nL = 8\nclass = lebesgue\nbogus_key = 1\n");
  CHECK(run("norm " + cfg_path("unknown.cfg")) == 2);

  write_config("dup.cfg", "n = 1\nn = 2\nN = 32\nL = 8\nclass = lebesgue\n");
  CHECK(run("norm " + cfg_path("dup.cfg")) == 2);

  write_config("syntax.cfg", "this line has no equals sign\n");
  CHECK(run("norm " + cfg_path("syntax.cfg")) == 2);

  write_config("badclass.cfg", "n = 1\nN = 32\nL = 8\nclass = septic\n");
  CHECK(run("norm " + cfg_path("badclass.cfg")) == 2);
}

TEST_CASE("norm command: flat weight, trend table, one-line summary") {
  write_config("a2.cfg",
               "# flat weight has A2 constant exactly 1\n"
               "n = 1\nN = 32\nL = 8\n"
               "potential = constant\npotential_a = 1\n"
               "class = a2\nout_dir = " + (kWork / "a2out").string() + "\n");
  CHECK(run("norm " + cfg_path("a2.cfg")) == 0);
  CHECK(line_count(kWork / "stdout.txt") == 1);

  auto j = nlohmann::json::parse(slurp(kWork / "a2out" / "norm.json"));
  CHECK(j["fine"]["value"].get<double>() == 1.0);
  CHECK(j["coarse"]["value"].get<double>() == 1.0);
  CHECK(line_count(kWork / "a2out" / "norm_trend.csv") == 3);  // header + N/2 + N
}

TEST_CASE("norm command: dimension preconditions exit with code 4") {
  write_config("kato2d.cfg", "n = 2\nN = 16\nL = 6\npotential = gaussian\nclass = kato\n");
  CHECK(run("norm " + cfg_path("kato2d.cfg")) == 4);
}

TEST_CASE("verify command: zero potential passes with constant zero") {
  write_config("rz.cfg",
               "n = 2\nN = 16\nL = 6\npotential = zero\nestimate = resolvent\n"
               "out_dir = " + (kWork / "rzout").string() + "\n");
  CHECK(run("verify " + cfg_path("rz.cfg")) == 0);
  CHECK(line_count(kWork / "stdout.txt") == 1);
  auto j = nlohmann::json::parse(slurp(kWork / "rzout" / "resolvent.json"));
  CHECK(j["sup"].get<double>() == 0.0);
  CHECK(j["verdict"].get<bool>());
  CHECK(fs::exists(kWork / "rzout" / "resolvent.csv"));

  write_config("badest.cfg", "n = 2\nN = 16\nL = 6\nestimate = telepathy\n");
  CHECK(run("verify " + cfg_path("badest.cfg")) == 2);
}

TEST_CASE("solve command: free problem converges, over-coupling exits 3") {
  write_config("free.cfg",
               "n = 2\nN = 16\nL = 6\nT = 4\nNt = 32\npotential = zero\n"
               "out_dir = " + (kWork / "freeout").string() + "\n");
  CHECK(run("solve " + cfg_path("free.cfg")) == 0);
  CHECK(line_count(kWork / "stdout.txt") == 1);

  auto j = nlohmann::json::parse(slurp(kWork / "freeout" / "diagnostics.json"));
  CHECK(j["converged"].get<bool>());
  CHECK(j["difference_history"].size() == 1);
  CHECK(!j.contains("wall_clock_seconds"));

  wre::Field u = wre::read_field((kWork / "freeout" / "solution.field").string());
  CHECK(u.grid().N == 16);
  CHECK(u.time()->Nt == 32);

  write_config("over.cfg",
               "n = 2\nN = 16\nL = 6\nT = 4\nNt = 32\n"
               "potential = gaussian\npotential_a = 1\ncoupling = 20\n"
               "out_dir = " + (kWork / "overout").string() + "\n");
  CHECK(run("solve " + cfg_path("over.cfg")) == 3);
}

TEST_CASE("solve command: small coupling records q below one half") {
  write_config("small.cfg",
               "n = 2\nN = 16\nL = 6\nT = 4\nNt = 32\n"
               "potential = inverse-square\npotential_a = 0.3\npotential_r0 = 0.5\n"
               "potential_r1 = 3\nforcing = pulse\n"
               "out_dir = " + (kWork / "smallout").string() + "\n");
  CHECK(run("solve " + cfg_path("small.cfg")) == 0);
  auto j = nlohmann::json::parse(slurp(kWork / "smallout" / "diagnostics.json"));
  CHECK(j["converged"].get<bool>());
  CHECK(j["contraction_factor"].get<double>() < 0.5);
}

TEST_CASE("sweep command: aggregation and byte-identical reruns") {
  write_config("sweep_empty.cfg", "n = 2\nN = 16\nL = 6\nestimates = \n");
  CHECK(run("sweep " + cfg_path("sweep_empty.cfg")) == 2);

  for (int pass = 1; pass <= 2; ++pass) {
    std::string out = (kWork / ("sweepout" + std::to_string(pass))).string();
    write_config("sweep" + std::to_string(pass) + ".cfg",
                 "n = 2\nN = 16\nL = 6\nT = 4\nNt = 32\nseed = 7\n"
                 "potential = inverse-square\npotential_a = 0.3\n"
                 "estimates = resolvent,strichartz\n"
                 "out_dir = " + out + "\n");
    CHECK(run("sweep " + cfg_path("sweep" + std::to_string(pass) + ".cfg")) == 0);
  }
  for (const char* f : {"sweep.json", "resolvent.json", "resolvent.csv", "strichartz.json",
                        "strichartz.csv"}) {
    CAPTURE(f);
    CHECK(slurp(kWork / "sweepout1" / f) == slurp(kWork / "sweepout2" / f));
    CHECK(!slurp(kWork / "sweepout1" / f).empty());
  }
  auto j = nlohmann::json::parse(slurp(kWork / "sweepout1" / "sweep.json"));
  CHECK(j["pass"].get<bool>());
  CHECK(j["verdicts"]["resolvent"].get<bool>());
  CHECK(j["verdicts"]["strichartz"].get<bool>());
}
