#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathwise/cli.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/report.hpp"

using namespace pathwise;

namespace {

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void drop(const std::string& file) {
  std::remove(file.c_str());
  std::remove((file + ".meta.json").c_str());
}

}  // namespace

TEST_CASE("worker-count resolution: explicit, environment, default") {
  CHECK(effective_threads(2) == 2);
  CHECK(effective_threads(7) == 7);
  setenv("TP_THREADS", "3", 1);
  CHECK(effective_threads(0) == 3);
  unsetenv("TP_THREADS");
  CHECK(effective_threads(0) >= 1);
}

TEST_CASE("usage errors exit with 2, runtime failures with 1") {
  CHECK(run_cli({"definitely-not-a-command"}) == 2);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"euler", "--preset", "nope"}) == 2);
  CHECK(run_cli({"qv", "--levels", "9:3", "--steps", "64"}) == 2);
  CHECK(run_cli({"qv", "--levels", "abc", "--steps", "64"}) == 2);
  CHECK(run_cli({"euler", "--drift", "x", "--steps", "64"}) == 2);  // missing diffusion
  CHECK(run_cli({"euler", "--preset", "tanh", "--clock", "sundial", "--steps", "64"}) ==
        2);
  // Runtime failures: unreadable input, unwritable output.
  CHECK(run_cli({"qv", "--input", "no_such_batch.tpth"}) == 1);
  CHECK(run_cli({"psi-check", "--out", "no_such_dir/psi.csv"}) == 1);
}

TEST_CASE("help requests succeed") {
  CHECK(run_cli({"--help"}) == 0);
  CHECK(run_cli({"qv", "--help"}) == 0);
}

TEST_CASE("qv command: data files and reruns are byte-identical") {
  const std::vector<std::string> base = {"qv",        "--steps",  "4096",
                                         "--levels",  "3:5",      "--seed",
                                         "9",         "--eval-points", "33"};
  auto with_out = [&](const std::string& out) {
    std::vector<std::string> a = base;
    a.push_back("--out");
    a.push_back(out);
    return a;
  };
  REQUIRE(run_cli(with_out("qv_a.csv")) == 0);
  REQUIRE(run_cli(with_out("qv_b.csv")) == 0);
  CHECK(slurp("qv_a.csv") == slurp("qv_b.csv"));
  CHECK(slurp("qv_a.csv.summary.csv") == slurp("qv_b.csv.summary.csv"));
  CHECK(slurp("qv_a.csv").substr(0, 11) == "level,t,Vn\n");

  nlohmann::json meta = nlohmann::json::parse(slurp("qv_a.csv.meta.json"));
  CHECK(meta["command"] == "qv");
  CHECK(meta["seed"] == 9);
  CHECK(meta.contains("wall_seconds"));
  CHECK(meta.contains("version"));

  drop("qv_a.csv");
  drop("qv_b.csv");
  drop("qv_a.csv.summary.csv");
  drop("qv_b.csv.summary.csv");
}

TEST_CASE("euler command writes a readable solution path") {
  REQUIRE(run_cli({"euler", "--preset", "tanh", "--x0", "0.5", "--steps", "4096",
                   "--level", "5", "--out", "sol.csv"}) == 0);
  SampledPath x = read_path_csv("sol.csv");
  CHECK(x.size() == 4097);
  CHECK(x.value_at(0) == 0.5);
  drop("sol.csv");
}

TEST_CASE("integrate and ito-check commands run end to end") {
  REQUIRE(run_cli({"integrate", "--steps", "4096", "--level", "5", "--integrand",
                   "x^2", "--out", "int.csv"}) == 0);
  CHECK(slurp("int.csv").substr(0, 22) == "t,value,est_error\n0,0,");
  drop("int.csv");

  REQUIRE(run_cli({"ito-check", "--paths", "4", "--steps", "16384", "--level", "5",
                   "--qv-level", "7", "--out", "res.csv"}) == 0);
  const std::string res = slurp("res.csv");
  CHECK(res.substr(0, 11) == "t,residual\n");
  CHECK(std::count(res.begin(), res.end(), '\n') >= 3);
  drop("res.csv");
}

TEST_CASE("converge command embeds the slope footer and is thread-invariant") {
  const std::vector<std::string> base = {
      "converge", "--preset", "tanh",  "--x0",   "0.5",  "--paths", "2",
      "--steps",  "16384",    "--levels", "4:5", "--ref-level", "8"};
  auto run = [&](const std::string& out, const std::string& threads) {
    std::vector<std::string> a = base;
    a.insert(a.end(), {"--threads", threads, "--out", out});
    REQUIRE(run_cli(a) == 0);
  };
  run("cv1.csv", "1");
  run("cv2.csv", "2");
  CHECK(slurp("cv1.csv") == slurp("cv2.csv"));
  CHECK(slurp("cv1.csv").find("fit_slope,") != std::string::npos);
  drop("cv1.csv");
  drop("cv2.csv");
}

TEST_CASE("psi-check accepts a config file overridden by explicit flags") {
  {
    std::ofstream cfg("psi.cfg");
    cfg << "epsilon=0.25\ndelta=4\ngrid-points=1000\n";
  }
  REQUIRE(run_cli({"psi-check", "--config", "psi.cfg", "--out", "psi.csv"}) == 0);
  nlohmann::json meta = nlohmann::json::parse(slurp("psi.csv.meta.json"));
  CHECK(meta["epsilon"] == 0.25);
  CHECK(meta["grid_points"] == 1000);

  REQUIRE(run_cli({"psi-check", "--config", "psi.cfg", "--epsilon", "0.5", "--out",
                   "psi.csv"}) == 0);
  meta = nlohmann::json::parse(slurp("psi.csv.meta.json"));
  CHECK(meta["epsilon"] == 0.5);

  std::remove("psi.cfg");
  drop("psi.csv");
}

TEST_CASE("doss and lamperti commands run end to end") {
  REQUIRE(run_cli({"doss", "--preset", "gbm", "--paths", "2", "--steps", "4096",
                   "--bv-levels", "3:4", "--out", "doss.csv"}) == 0);
  const std::string body = slurp("doss.csv");
  CHECK(body.find("limit_agreement_mean,") != std::string::npos);
  CHECK(body.find("fit_slope,") != std::string::npos);
  drop("doss.csv");

  REQUIRE(run_cli({"lamperti", "--preset", "gbm", "--steps", "4096", "--compare-doss",
                   "--out", "lam.csv"}) == 0);
  SampledPath x = read_path_csv("lam.csv");
  CHECK(x.value_at(0) == 1.0);
  drop("lam.csv");
}
