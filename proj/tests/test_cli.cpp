#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "asep_lab_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(ASEP_LAB_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string dir(const std::string& name) {
  const fs::path d = kWork / name;
  fs::remove_all(d);
  return "--out-dir " + d.string();
}

}  // namespace

TEST_CASE("exact-prob at t = 0 gives the geometric column") {
  REQUIRE(run(dir("exact") + " exact-prob --p 0.3 --q 0.7 --rho 0.5 --m 1 --t 0 --x-min 1 --x-max 5") ==
          0);
  const auto rows = csv_rows(kWork / "exact" / "exact_prob.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0][1] == "P(x_m(t)<=x)");
  for (int x = 1; x <= 5; ++x)
    CHECK(std::abs(std::stod(rows[x][1]) - (1 - std::pow(0.5, x))) < 1e-9);
  const auto manifest = nlohmann::json::parse(slurp(kWork / "exact" / "exact-prob.manifest.json"));
  CHECK(manifest["command"] == "exact-prob");
  CHECK(manifest["exit_code"] == 0);
  CHECK(manifest["settings"]["m"] == 1);
}

TEST_CASE("exit codes") {
  CHECK(run(dir("e1") + " exact-prob --p 0.3 --rho 0.5 --m 1 --t 0 --x-min 1 --x-max 2") == 1);
  CHECK(run(dir("e1b") + " exact-prob --p 0.3 --q 0.6 --rho 0.5 --m 1 --t 0 --x-min 1 --x-max 2") ==
        1);
  CHECK(run(dir("e1c") + " limit-dist --law f3") == 1);
  CHECK(run(dir("e1d") + " converge --sigma -0.1 --rho 1 --t-list 10,20 --trials 200") == 1);
  CHECK(run(dir("e1e") + " converge --sigma 0.5 --rho 0.5 --regime tw2 --t-list 10 --trials 200") ==
        1);
  CHECK(run(dir("e2") + " exact-prob --p 0.3 --q 0.7 --rho 0.5 --m 2 --t 2 --x-min 0 --x-max 0"
                        " --tol 1e-16 --n-cap 64") == 2);
  CHECK(run(dir("e3") + " simulate --p 0.3 --q 0.7 --rho 1 --t 20 --trials 20 --margin 0"
                        " --m-list 3") == 3);
  CHECK(run(dir("e4") + " verify-identities --kmax 2 --points-per-k 2 --perturb-tau") == 4);
  CHECK(run(dir("e0") + " verify-identities --kmax 1 --points-per-k 3") == 0);
  CHECK(run("--help") == 0);
}

TEST_CASE("limit-dist table") {
  REQUIRE(run(dir("dist") + " limit-dist --law g --s-min -1 --s-max 1 --step 0.25") == 0);
  const auto rows = csv_rows(kWork / "dist" / "limit_dist.csv");
  REQUIRE(rows.size() == 10);
  CHECK(rows[5][0] == "0");
  CHECK(rows[5][1] == "0.5");
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) > std::stod(rows[i - 1][1]));
}

TEST_CASE("simulate writes CDFs and replays bit for bit") {
  REQUIRE(run(dir("sim") + " simulate --p 0.3 --q 0.7 --rho 0.5 --t 3 --trials 300 --seed 5"
                           " --m-list 1,2 --x-list -1,2") == 0);
  const fs::path manifest = kWork / "sim" / "simulate.manifest.json";
  const auto m = nlohmann::json::parse(slurp(manifest));
  CHECK(m["details"]["duality_violations"] == 0);
  CHECK(m["seeds"]["root"] == 5);
  const auto rows = csv_rows(kWork / "sim" / "position_m1.csv");
  CHECK(rows.front() == std::vector<std::string>{"value", "count", "cum_prob"});
  CHECK(rows.back()[2] == "1");

  REQUIRE(run(dir("replay") + " replay " + manifest.string()) == 0);
  for (const char* f : {"position_m1.csv", "position_m2.csv", "current_x-1.csv", "current_x2.csv"})
    CHECK(slurp(kWork / "sim" / f) == slurp(kWork / "replay" / f));
}

TEST_CASE("thread count does not change results") {
  REQUIRE(run(dir("t1") + " --threads 1 simulate --p 0.3 --q 0.7 --rho 0.5 --t 2 --trials 200"
                          " --m-list 2") == 0);
  REQUIRE(run(dir("t3") + " --threads 3 simulate --p 0.3 --q 0.7 --rho 0.5 --t 2 --trials 200"
                          " --m-list 2") == 0);
  CHECK(slurp(kWork / "t1" / "position_m2.csv") == slurp(kWork / "t3" / "position_m2.csv"));
}

TEST_CASE("verify-identities report") {
  REQUIRE(run(dir("ident") + " verify-identities --kmax 3 --points-per-k 2 --seed 4") == 0);
  const auto r = nlohmann::json::parse(slurp(kWork / "ident" / "identities.json"));
  CHECK(r["failures"] == 0);
  CHECK(r["negative_control_detected"] == true);
  CHECK(r["cases"].size() == 12);
}
