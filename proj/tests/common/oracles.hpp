#pragma once

#include <string>
#include <vector>

#include "selsamp/design.hpp"
#include "selsamp/instance.hpp"
#include "selsamp/estimators.hpp"

namespace oracle {

using selsamp::Vec;

// ρ(λ) for 2-D points with a hand-written 2×2 inverse; +inf when singular.
double rho2(const std::vector<Vec>& points, const std::vector<double>& lam, const std::vector<Vec>& dirs,
            const std::vector<double>& denom);

// Greedy fill of the capped simplex {λ ≤ κν}: points sorted by cos(2φ − α) descending.
std::vector<double> greedy_fill(const std::vector<Vec>& points, const std::vector<double>& nu, double alpha,
                                double cap);

// min ρ(λ) s.t. ‖λ/ν‖∞ ρ(λ) ≤ T over the (α, κ) family on an n_alpha × n_cap grid (2-D points).
// Returns +inf when no grid point is feasible.
double grid_reparam(const std::vector<Vec>& points, const std::vector<double>& nu, const std::vector<Vec>& dirs,
                    const std::vector<double>& denom, double T, int n_alpha = 100, int n_cap = 100);

// Same program on a two-point support by a 1-D grid over λ = (p, 1 − p).
double grid_reparam_two_point(const std::vector<Vec>& points, const std::vector<double>& nu,
                              const std::vector<Vec>& dirs, const std::vector<double>& denom, double T,
                              int n = 10000);

// min_λ ρ(λ) with no cap, for unit-norm 2-D points: A(λ) = [[a, b], [b, 1 − a]] ranges
// over the convex hull of the points' (x₁², x₁x₂); grid over (a, b) with n² points,
// then a refinement grid around the best cell.
double grid_pool_2d(const std::vector<Vec>& points, const std::vector<Vec>& dirs, const std::vector<double>& denom,
                    int n = 400);

// Capped program for 2-D unit points by bisection on the cost and a moment-polygon grid. Same units as
// grid_reparam: returns T · min Σ ν p.
double grid_capped_2d(const std::vector<Vec>& points, const std::vector<double>& nu, const std::vector<Vec>& dirs,
                      const std::vector<double>& denom, double T, int n_dirs = 720, int n = 80);

struct PropResult {
  long cases = 0;
  long failures = 0;
  double worst = 0.0;  // worst observed statistic (property specific)
  std::string first_failure;
  bool ok() const { return failures == 0; }
};

PropResult prop_stationarity(long cases, unsigned seed);
PropResult prop_selection_range_monotone(long cases, unsigned seed);
PropResult prop_gradient_fd(long cases, unsigned seed);
PropResult prop_f_linearity(long cases, unsigned seed);
PropResult prop_schur(long cases, unsigned seed);
PropResult prop_psd_project(long cases, unsigned seed);
PropResult prop_robust_equivariance(long cases, unsigned seed);
// Coverage runs report failures = number of repetitions outside the bound; `worst` = coverage.
PropResult prop_gaussian_coverage(selsamp::RobustMethod method, int reps, unsigned seed);
PropResult prop_rips_coverage(int trials, unsigned seed);
PropResult prop_classification_identity(int draws_per_size, unsigned seed);

}  // namespace oracle
