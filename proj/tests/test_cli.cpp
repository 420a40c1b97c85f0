#include "catch_amalgamated.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gapmap/cli.hpp"

using namespace gapmap;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("gapmap_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("verify passes with the reference parameters") {
  const std::string out = tmp_path("verify.json");
  const int rc = run_cli({"verify", "--grid", "8192", "--out", out});
  REQUIRE(rc == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  REQUIRE(j.contains("config"));
  REQUIRE(j.contains("results"));
  REQUIRE(j.contains("tail_bound"));
  REQUIRE(j.contains("version"));
  REQUIRE(j["config"]["c"] == 0.01);
  REQUIRE(j["results"].size() == 5);
  for (const auto& r : j["results"]) REQUIRE(r["pass"] == true);
}

TEST_CASE("verify fails scientifically for large c") {
  const std::string out = tmp_path("verify_bad.json");
  const int rc = run_cli({"verify", "--c", "0.2", "--grid", "4096", "--out", out});
  REQUIRE(rc == 1);
}

TEST_CASE("invalid configuration exits 2") {
  REQUIRE(run_cli({"verify", "--N", "3"}) == 2);
  REQUIRE(run_cli({"verify", "--c", "0.3"}) == 2);
  REQUIRE(run_cli({"verify", "--c", "-1"}) == 2);
  REQUIRE(run_cli({"nonsense"}) == 2);
  REQUIRE(run_cli({}) == 2);
  REQUIRE(run_cli({"verify", "--format", "yaml"}) == 2);
}

TEST_CASE("blowup table") {
  const std::string out = tmp_path("blowup.csv");
  const int rc = run_cli({"blowup", "--n-list", "2", "3", "4", "--k", "1", "--format",
                          "csv", "--out", out});
  REQUIRE(rc == 0);
  const std::string text = slurp(out);
  REQUIRE(text.find("# c=0.01") == 0);
  REQUIRE(text.find("n,k,var_in,var_out,ratio,predicted") != std::string::npos);

  // Parse the ratio column and check monotone growth.
  std::istringstream is(text);
  std::string line;
  std::vector<double> ratios;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    double ratio = 0, pred = 0;
    int n = 0, k = 0;
    double vi = 0, vo = 0;
    REQUIRE(std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf,%lf", &n, &k, &vi, &vo, &ratio,
                        &pred) == 6);
    ratios.push_back(ratio);
  }
  REQUIRE(ratios.size() == 3);
  REQUIRE(ratios[1] > ratios[0]);
  REQUIRE(ratios[2] > ratios[1]);
}

TEST_CASE("blowup usage errors") {
  REQUIRE(run_cli({"blowup", "--k", "0"}) == 2);
  // Explicit n_max is binding; indices past it are rejected.
  REQUIRE(run_cli({"blowup", "--n-max", "2", "--n-list", "3", "--k", "1"}) == 2);
  // Without explicit n_max the truncation widens to cover the list.
  const std::string out = tmp_path("blowup_wide.csv");
  REQUIRE(run_cli({"blowup", "--n-list", "9", "--k", "1", "--format", "csv", "--out",
                   out}) == 0);
}

TEST_CASE("blowup output is deterministic") {
  const std::string out1 = tmp_path("blowup_a.csv");
  const std::string out2 = tmp_path("blowup_b.csv");
  REQUIRE(run_cli({"blowup", "--n-list", "2", "--k", "1", "--format", "csv", "--out",
                   out1}) == 0);
  REQUIRE(run_cli({"blowup", "--n-list", "2", "--k", "1", "--format", "csv", "--out",
                   out2}) == 0);
  REQUIRE(slurp(out1) == slurp(out2));

  // The worker count must not leak into the numbers.
  const std::string out3 = tmp_path("blowup_c.csv");
  setenv("GAPMAP_THREADS", "3", 1);
  const int rc = run_cli({"blowup", "--n-list", "2", "--k", "1", "--format", "csv",
                          "--out", out3});
  unsetenv("GAPMAP_THREADS");
  REQUIRE(rc == 0);
  REQUIRE(slurp(out1) == slurp(out3));
}

TEST_CASE("spectrum command") {
  const std::string out = tmp_path("spectrum.json");
  const int rc =
      run_cli({"spectrum", "--grid", "4096", "--iters", "24", "--out", out});
  REQUIRE(rc == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["results"]["spectral"]["lambda2_estimate"] < 1.0);
  REQUIRE(j["results"]["peripheral_decay"] == true);
  REQUIRE(j["version"] == kVersion);

  REQUIRE(run_cli({"spectrum", "--iters", "5"}) == 2);
}

TEST_CASE("orbit command") {
  const std::string out = tmp_path("orbit.json");
  const int rc = run_cli({"orbit", "--grid", "4096", "--steps", "5000", "--n-max", "64",
                          "--out", out});
  REQUIRE(rc == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["results"]["fn"] == "identity");
  REQUIRE(j["results"]["orbit"]["steps_completed"] == 5000);

  REQUIRE(run_cli({"orbit", "--steps", "0"}) == 2);
  REQUIRE(run_cli({"orbit", "--fn", "sombrero"}) == 2);
  // Start point inside the truncation window of a coarse family.
  REQUIRE(run_cli({"orbit", "--n-max", "2", "--x0", "0.046", "--steps", "2000",
                   "--grid", "4096", "--out", tmp_path("orbit_gap.json")}) == 1);
}
