#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "selsamp/instance.hpp"
#include "selsamp/sampler.hpp"

namespace selsamp::cli {

enum ExitCode { ok = 0, config_error = 2, infeasible = 3, solver_failure = 4 };

struct ClassifyConfig {
  int n = 6;
  std::vector<double> eta;  // default: 0.1 left of the midpoint, 0.9 right of it
  std::vector<double> pi;   // default: uniform
  std::vector<double> nu;   // default: uniform
  double eps = 0.1;
  double bound_tau = 0.0;  // 0: the smallest τ the disagreement-form bound allows
};

struct ExperimentConfig {
  std::string instance_name = "benchmark";  // "benchmark", "two_point" or "inline"
  Instance instance;
  std::vector<double> tau_grid{4e4, 1e5, 4e5};
  double delta = 0.05;
  int trials = 50;
  std::vector<SamplerMode> modes{SamplerMode::naive, SamplerMode::oracle, SamplerMode::learned};
  SolverParams solver;
  double epsilon_cert = 0.25;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  double design_tau = 4e5;
  int design_round = 0;  // 0: deepest round that still has a competitor under exact elimination
  std::vector<double> budget_grid;  // empty: geometric grid around the threshold
  int budget_points = 24;
  bool theorem_log = false;
  ClassifyConfig classify;
};

// Strict parse: unknown keys, wrong types and out-of-range values throw InvalidInput.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg);

// Commands write into cfg.output_dir and return an exit code; diagnostics go to `log`.
int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& log);
int cmd_dump_design(const ExperimentConfig& cfg, std::ostream& log);
int cmd_tradeoff(const ExperimentConfig& cfg, std::ostream& log);
int cmd_classify_demo(const ExperimentConfig& cfg, int jobs, std::ostream& log);

// Runs `fn` and maps library errors onto exit codes.
template <class F>
int guarded(F&& fn, std::ostream& err);

int exit_code_for_current_exception(std::ostream& err);

template <class F>
int guarded(F&& fn, std::ostream& err) {
  try {
    return fn();
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
}

}  // namespace selsamp::cli
