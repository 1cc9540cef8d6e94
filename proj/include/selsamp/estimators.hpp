#pragma once

#include <vector>

#include "selsamp/design.hpp"
#include "selsamp/instance.hpp"
#include "selsamp/linalg.hpp"

namespace selsamp {

enum class RobustMethod { catoni, median_of_means };

struct RobustMeanConfig {
  RobustMethod method = RobustMethod::catoni;
  double delta = 0.05;
};

double robust_mean(const std::vector<double>& samples, const RobustMeanConfig& cfg);
// Same estimate over `samples` followed by `zeros` extra zero samples.
double robust_mean_with_zeros(const std::vector<double>& samples, long zeros, const RobustMeanConfig& cfg);

struct RipsResult {
  Vec theta_hat;
  double achieved_objective = 0.0;
  std::vector<double> direction_bounds;  // ‖v‖_{Σ⁻¹}
  std::vector<double> direction_means;   // w_v
  double initial_objective = 0.0;        // at the least-squares start
};

// Draws index into `support`. Unqueried draws contribute zero vectors.
RipsResult rips_estimate(const std::vector<LabeledDraw>& draws, const std::vector<Vec>& support,
                         const SymMatrix& cov, const std::vector<Vec>& directions, double delta,
                         RobustMethod method = RobustMethod::catoni);

// max_v |w_v − ⟨θ, v⟩| / n_v
double rips_objective(const Vec& theta, const std::vector<Vec>& directions, const std::vector<double>& w,
                      const std::vector<double>& norms);
Vec rips_fit(const std::vector<Vec>& directions, const std::vector<double>& w,
             const std::vector<double>& norms, double* initial_objective = nullptr);

struct CovarianceEstimate {
  SymMatrix sigma;
  double sandwich_gamma;  // NaN when no exact Σ_P is given
};

CovarianceEstimate empirical_covariance(const SelectionRule& rule, const std::vector<Vec>& samples,
                                        const SymMatrix* exact = nullptr);

enum class BetaVariant { round, global, classification };

struct BetaParams {
  double delta = 0.05;
  int round = 1;        // ℓ for round, L for global
  int num_arms = 1;     // |Z|, or |H| for classification
  double bound_B = 1.0;
  double sigma = 1.0;
  double eps = 0.5;     // classification only
  double scale = 1.0;
};

double beta_constant(const BetaParams& p, BetaVariant variant);

}  // namespace selsamp
