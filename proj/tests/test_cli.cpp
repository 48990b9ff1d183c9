#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kdv5/cli.hpp"
#include "kdv5/io.hpp"

using namespace kdv5;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("kdv5_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("series: first two orders") {
  TempDir dir;
  const auto r = run({"series", "--n-max", "1", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == "c = [4, 16]\n");
  const auto doc = read_json(dir.path / "series.json");
  CHECK(doc["c"] == nlohmann::json({"4", "16"}));
  CHECK(doc["u"][1] == nlohmann::json::parse(R"([["1","-20"],["2","30"]])"));

  const auto manifest = read_json(dir.path / "manifest_series.json");
  CHECK(manifest["command"] == "series");
  CHECK(manifest["version"] == kVersion);
  CHECK(manifest["parameters"]["n_max"] == 1);
  CHECK(manifest["outputs"].size() == 1);
  CHECK_FALSE(fs::exists(dir.path / "series.json.tmp"));
}

TEST_CASE("series: gamma = 2, leading order only") {
  TempDir dir;
  const auto r = run({"series", "--n-max", "0", "--gamma", "2", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out == "c = [16]\n");
  const auto doc = read_json(dir.path / "series.json");
  CHECK(doc["gamma"] == "2");
  CHECK(doc["u"][0] == nlohmann::json::parse(R"([["1","8"]])"));
}

TEST_CASE("series: rejected arguments") {
  TempDir dir;
  CHECK(run({"series", "--gamma", "0", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"series", "--gamma", "abc", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"series", "--n-max", "-3", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"series", "--n-max", "500", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"nonsense"}).code == kExitValidation);
  CHECK(run({}).code == kExitValidation);
  CHECK(fs::is_empty(dir.path));
}

TEST_CASE("lambda") {
  TempDir dir;
  const auto few = run({"lambda", "--n-max", "3", "--out", dir.path.string()});
  CHECK(few.code == kExitValidation);
  CHECK(few.err.find("insufficient data") != std::string::npos);
  CHECK(fs::is_empty(dir.path));

  const auto r = run({"lambda", "--n-max", "30", "--emit-csv", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("lambda_final = -19.9") == 0);
  const auto report = read_json(dir.path / "lambda_report.json");
  CHECK(report["lambda_final"]["estimate"].get<double>() == doctest::Approx(-19.97).epsilon(0.005));
  CHECK(report["beta_fit"]["best_beta"] == 2);
  const auto csv = slurp(dir.path / "lambda.csv");
  CHECK(csv.rfind("n,lambda_n\n0,-2\n1,-5\n", 0) == 0);
}

TEST_CASE("stokes-profile") {
  TempDir dir;
  const auto r = run({"stokes-profile", "--epsilon", "0.1", "0.05", "--steps", "1000", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir.path / "stokes_profile_eps0.1.csv"));
  CHECK(fs::exists(dir.path / "stokes_profile_eps0.05.csv"));
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

  // zero strength: a flat profile and a zero ratio
  const auto flat = run({"stokes-profile", "--epsilon", "0.1", "--lambda", "0", "--out", dir.path.string()});
  REQUIRE(flat.code == kExitOk);
  CHECK(flat.out.find("ratio=0") != std::string::npos);

  CHECK(run({"stokes-profile", "--epsilon", "0.1", "--rho", "2", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"stokes-profile", "--epsilon", "0.1", "--steps", "10", "--out", dir.path.string()}).code ==
        kExitValidation);
  CHECK(run({"stokes-profile", "--epsilon", "-0.1", "--out", dir.path.string()}).code == kExitValidation);
}

TEST_CASE("tails") {
  TempDir dir;
  const auto r = run({"tails", "--epsilon", "0.1", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir.path / "solution_eps0.1.csv"));
  CHECK_FALSE(fs::exists(dir.path / "fit.json"));  // one epsilon: no fit
  std::istringstream lines(slurp(dir.path / "tails.jsonl"));
  std::string line;
  std::getline(lines, line);
  const auto m = nlohmann::json::parse(line);
  CHECK(m["epsilon"] == 0.1);
  CHECK(m["amplitude_measured"].get<double>() > 0.0);
  CHECK(m["discretization_error"].get<double>() < m["amplitude_measured"].get<double>());

  const auto sweep = run({"tails", "--epsilon", "0.15", "0.12", "0.1", "0.08", "--out", dir.path.string()});
  REQUIRE(sweep.code == kExitOk);
  const auto fit = read_json(dir.path / "fit.json");
  CHECK(fit["slope"].get<double>() == doctest::Approx(-1.5708).epsilon(0.05));

  // resolution and contamination failures
  CHECK(run({"tails", "--epsilon", "0.1", "--grid-h", "0.05", "--out", dir.path.string()}).code == kExitValidation);
  CHECK(run({"tails", "--epsilon", "0.1", "--domain-length", "11", "--out", dir.path.string()}).code ==
        kExitValidation);
  const auto dirty = run({"tails", "--epsilon", "0.04", "--out", dir.path.string()});
  CHECK(dirty.code == kExitMath);
  CHECK(dirty.err.find("contaminated") != std::string::npos);
}

TEST_CASE("compare") {
  TempDir dir;
  const auto r = run({"compare", "--epsilon", "0.1", "--x", "0", "--out", dir.path.string()});
  REQUIRE(r.code == kExitOk);
  const auto doc = read_json(dir.path / "compare.json");
  CHECK(doc["optimal_N"] == 8);
  CHECK(doc["smallest_term_index"] == 7);
  CHECK(doc["error_at_smallest_term"].get<double>() < 2e-4);
  CHECK(run({"compare", "--epsilon", "0.1", "--x", "40", "--out", dir.path.string()}).code == kExitValidation);
}

TEST_CASE("output directory from the environment") {
  TempDir dir;
  ::setenv(kOutDirEnv, dir.path.string().c_str(), 1);
  const auto r = run({"series", "--n-max", "2"});
  ::unsetenv(kOutDirEnv);
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir.path / "series.json"));
}

TEST_CASE("outputs are deterministic") {
  TempDir a, b;
  REQUIRE(run({"lambda", "--n-max", "12", "--emit-csv", "--out", a.path.string()}).code == kExitOk);
  REQUIRE(run({"lambda", "--n-max", "12", "--emit-csv", "--out", b.path.string()}).code == kExitOk);
  CHECK(slurp(a.path / "lambda_report.json") == slurp(b.path / "lambda_report.json"));
  CHECK(slurp(a.path / "lambda.csv") == slurp(b.path / "lambda.csv"));
  REQUIRE(run({"tails", "--epsilon", "0.12", "--out", a.path.string()}).code == kExitOk);
  REQUIRE(run({"tails", "--epsilon", "0.12", "--out", b.path.string()}).code == kExitOk);
  CHECK(slurp(a.path / "tails.jsonl") == slurp(b.path / "tails.jsonl"));
}
