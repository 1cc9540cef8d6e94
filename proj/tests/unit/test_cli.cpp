#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "selsamp/cli.hpp"
#include "selsamp/errors.hpp"

using namespace selsamp;
using namespace selsamp::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("selsamp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

int parse_exit(const std::string& text) {
  std::ostringstream err;
  return guarded([&] { return static_cast<int>(parse_config(text).trials * 0); }, err);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config("{}"));
  CHECK_THROWS_AS(parse_config(R"({"trials": 0})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"trails": 5})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"tau_grid": [1e5, 4e4]})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"tau_grid": []})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"solver": {"mu_b": 0}})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"solver": {"mu_b": 1.0}})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"solver": {"K": 10, "Kx": 1}})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"modes": ["naive", "greedy"]})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"instance": "moon"})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"trials": "five"})"), InvalidInput);
  CHECK_THROWS_AS(parse_config(R"({"delta": 1.5})"), InvalidInput);
  CHECK_THROWS_AS(parse_config("{"), InvalidInput);
  CHECK(parse_exit(R"({"trials": 0})") == config_error);
  CHECK(parse_exit("{}") == ok);
}

TEST_CASE("config round trip") {
  const std::string text = R"({"instance": "two_point", "tau_grid": [100, 1000], "trials": 7, "seed": 11,
    "modes": ["oracle"], "solver": {"K": 1234, "u": 99, "mu_b": 0.001, "source": "replay", "robust": "median_of_means"},
    "classification": {"n": 4, "eps": 0.2}})";
  const ExperimentConfig c = parse_config(text);
  CHECK(c.instance_name == "two_point");
  CHECK(c.trials == 7);
  CHECK(c.seed == 11);
  CHECK(c.solver.sga.iters == 1234);
  CHECK(c.solver.source == SampleSource::replay);
  CHECK(c.solver.robust == RobustMethod::median_of_means);
  const std::string once = config_to_json(c);
  CHECK(config_to_json(parse_config(once)) == once);

  ExperimentConfig inl = c;
  inl.instance_name = "inline";
  const std::string twice = config_to_json(parse_config(config_to_json(inl)));
  CHECK(twice == config_to_json(inl));
}

TEST_CASE("exit code mapping") {
  std::ostringstream err;
  CHECK(guarded([]() -> int { throw Infeasible("x", 5.0); }, err) == infeasible);
  CHECK(guarded([]() -> int { throw InvalidInput("x"); }, err) == config_error);
  CHECK(guarded([]() -> int { throw SolverFailure("x", 1.0); }, err) == solver_failure);
  CHECK(guarded([]() -> int { throw SingularMatrix("x"); }, err) == solver_failure);
  CHECK(guarded([] { return 0; }, err) == ok);
  CHECK(err.str().find("infeasible") != std::string::npos);
}

TEST_CASE("dump-design bookkeeping") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config(R"({"solver": {"K": 20000, "u": 20000}})");
  cfg.output_dir = tmp.path.string();
  cfg.design_tau = 4e5;
  std::ostringstream log;
  REQUIRE(cmd_dump_design(cfg, log) == ok);
  const auto rows = read_csv(tmp.path / "design.csv");
  REQUIRE(rows.size() == 31);
  CHECK(rows[0] == std::vector<std::string>{"index", "angle", "nu", "p_oracle", "p_learned"});
  const json summary = json::parse(slurp(tmp.path / "design.json"));
  double book = 0.0;
  int near_e2 = 1;
  for (size_t i = 1; i < rows.size(); ++i) {
    const double nu = std::stod(rows[i][2]), p = std::stod(rows[i][3]), pl = std::stod(rows[i][4]);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(pl >= 0.0);
    CHECK(pl <= 1.0);
    book += nu * p;
    if (std::abs(std::cos(std::stod(rows[i][1]))) < std::abs(std::cos(std::stod(rows[near_e2][1])))) near_e2 = i;
  }
  CHECK(book * cfg.design_tau == doctest::Approx(summary["oracle_cost"].get<double>()).epsilon(1e-9));
  CHECK(std::stod(rows[near_e2][3]) > std::stod(rows[1][3]));
  CHECK(fs::exists(tmp.path / "config.json"));
}

TEST_CASE("dump-design below the feasible budget") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config("{}");
  cfg.output_dir = tmp.path.string();
  cfg.design_tau = 10.0;
  std::ostringstream log, err;
  CHECK(guarded([&] { return cmd_dump_design(cfg, log); }, err) == infeasible);
}

TEST_CASE("sweep outputs") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config(R"({"tau_grid": [40000], "trials": 2, "modes": ["naive", "oracle"]})");
  cfg.output_dir = tmp.path.string();
  std::ostringstream log;
  REQUIRE(cmd_sweep(cfg, 1, log) == ok);
  const auto rows = read_csv(tmp.path / "sweep.csv");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].size() == 8);
  CHECK(rows[1][1] == "naive");
  CHECK(rows[2][1] == "oracle");
  CHECK(parse_config(slurp(tmp.path / "config.json")).trials == 2);

  // every cell below the budget: exit 3
  ExperimentConfig low = cfg;
  low.tau_grid = {50.0};
  low.modes = {SamplerMode::learned};
  CHECK(cmd_sweep(low, 1, log) == infeasible);
}

TEST_CASE("tradeoff outputs") {
  TempDir tmp;
  ExperimentConfig cfg = parse_config(R"({"instance": "two_point", "budget_points": 5})");
  cfg.output_dir = tmp.path.string();
  std::ostringstream log;
  REQUIRE(cmd_tradeoff(cfg, log) == ok);
  const auto rows = read_csv(tmp.path / "tradeoff.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"budget", "min_labels", "feasible", "witness_linf_ratio",
                                            "upper_labels", "upper_feasible"});
  CHECK(rows[1][2] == "0");
  CHECK(rows[1][1] == "inf");
  CHECK(rows[5][2] == "1");
}

}  // TEST_SUITE
