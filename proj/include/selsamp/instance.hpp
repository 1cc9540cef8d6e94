#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "selsamp/linalg.hpp"

namespace selsamp {

using Rng = std::mt19937_64;

enum class LabelNoise { gaussian, rademacher };

struct Instance {
  std::vector<Vec> arms;           // Z
  std::vector<Vec> stream_points;  // support of ν
  std::vector<double> stream_probs;
  Vec theta_star;
  double noise_sigma = 1.0;
  double bound_B = 1.0;
  // rademacher: y ∈ {−1, +1} with E[y|x] = ⟨x, θ*⟩ (classification reduction).
  LabelNoise noise = LabelNoise::gaussian;

  int dim() const { return static_cast<int>(theta_star.size()); }
  int num_arms() const { return static_cast<int>(arms.size()); }
  int support_size() const { return static_cast<int>(stream_points.size()); }
  double mean_label(int point) const { return stream_points[point].dot(theta_star); }
  void validate() const;
};

struct ClassificationInstance {
  std::vector<Vec> domain_points;
  std::vector<std::vector<int>> hypotheses;  // ±1 label per domain point
  std::vector<double> eta;                   // P(Y = +1 | x)
  std::vector<double> pi_probs;
  std::vector<double> nu_probs;

  void validate() const;
};

struct LabeledDraw {
  int point = -1;  // index into the stream support
  double y = 0.0;
  bool queried = false;
  double query_prob = 0.0;
};

struct BestArm {
  int index;
  double gap;
};

BestArm gap_and_best(const Instance& inst);
BestArm gap_and_best(const Instance& inst, const std::vector<int>& active);

Instance benchmark_instance();
// Z = X = {e1, e2}, θ* = (1, 0), ν uniform.
Instance two_point_instance();

// Categorical sampler over the stream support with a precomputed CDF.
class StreamSampler {
 public:
  explicit StreamSampler(const std::vector<double>& probs);
  int draw(Rng& rng) const;

 private:
  std::vector<double> cdf_;
};

int sample_stream_index(const Instance& inst, Rng& rng);
Vec sample_stream(const Instance& inst, Rng& rng);
double sample_label(const Instance& inst, const Vec& x, Rng& rng);

double classification_risk(const ClassificationInstance& ci, int h);

struct BanditReduction {
  Instance instance;
  double risk_offset;  // c with R_π(h) = c − ⟨z^(h), θ*⟩
};
BanditReduction classification_to_bandit(const ClassificationInstance& ci);

// Thresholds h_t(x) = +1 iff x ≥ t on `n` evenly spaced points in [0, 1],
// one hypothesis per cut position.
ClassificationInstance threshold_instance(int n, const std::vector<double>& eta,
                                          const std::vector<double>& pi,
                                          const std::vector<double>& nu);

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

}  // namespace selsamp
