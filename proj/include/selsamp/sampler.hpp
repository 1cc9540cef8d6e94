#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "selsamp/design.hpp"
#include "selsamp/estimators.hpp"
#include "selsamp/instance.hpp"

namespace selsamp {

enum class SamplerMode { naive, oracle, learned };
enum class SampleSource { fresh, replay, exact };
enum class CovarianceSource { exact, empirical };

const char* mode_name(SamplerMode m);
SamplerMode parse_mode(const std::string& s);

struct SolverParams {
  SgaOptions sga;
  SampleSource source = SampleSource::fresh;
  CovarianceSource covariance = CovarianceSource::exact;
  RobustMethod robust = RobustMethod::catoni;
  double beta_scale = 1.0;
  int safety_rounds = 3;
  double gap_lower_bound = 0.0;  // 0: use the true gap
};

struct RoundLog {
  int round = 0;
  std::vector<int> active_arms;
  double eps = 0.0;
  long labels_requested = 0;
  long unlabeled_seen = 0;
  bool design_saturated = false;  // design infeasible this round, every point queried
  std::optional<DesignCertificate> rule_certificate;
};

struct RunResult {
  int recommended_arm = -1;
  long total_unlabeled = 0;
  long total_labels = 0;
  std::vector<RoundLog> rounds;
  bool correct = false;
};

// Oracle designs depend only on (τ, ℓ, active set); shared across trials.
class OracleCache {
 public:
  std::shared_ptr<const OracleDesign> get(const std::string& key);
  void put(const std::string& key, std::shared_ptr<const OracleDesign> v);

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const OracleDesign>> map_;
};

RunResult run(const Instance& inst, double tau, double delta, SamplerMode mode, const SolverParams& params,
              Rng& rng, OracleCache* cache = nullptr);

struct SweepCell {
  double tau = 0.0;
  SamplerMode mode = SamplerMode::naive;
  int trials = 0;
  int completed = 0;
  double mean_labels = 0.0;
  double std_labels = 0.0;
  double mean_unlabeled = 0.0;
  double success_rate = 0.0;
  double mean_rounds = 0.0;
  std::vector<double> labels;  // per completed trial
  std::string error;           // first error seen in this cell
  bool infeasible = false;     // every trial failed on the budget
};

std::uint64_t trial_seed(std::uint64_t seed, double tau, SamplerMode mode, int trial);

std::vector<SweepCell> label_complexity_sweep(const Instance& inst, const std::vector<double>& tau_grid,
                                              double delta, const std::vector<SamplerMode>& modes, int trials,
                                              std::uint64_t seed, const SolverParams& params, int jobs = 1);

std::string sweep_csv(const std::vector<SweepCell>& cells);

// Shortest round-trip decimal; `nan` for NaN and `inf` for infinities.
std::string format_double(double v);

}  // namespace selsamp
