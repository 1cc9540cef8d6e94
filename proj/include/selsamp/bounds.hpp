#pragma once

#include <string>
#include <vector>

#include "selsamp/design.hpp"
#include "selsamp/instance.hpp"

namespace selsamp {

// log(1/(2.4δ)) by default; log(1/δ) with `theorem_form`. Clamped at 0.
double lower_log_factor(double delta, bool theorem_form = false);

double lower_bound_unlabeled(const Instance& inst, double delta, bool theorem_form = false);

struct TradeoffPoint {
  double unlabeled_budget = 0.0;
  double min_labels = 0.0;  // +inf when infeasible
  bool feasible = false;
  DesignWeights witness_lambda;
  double witness_linf_ratio = 0.0;  // ‖λ/ν‖∞ of the witness, NaN when infeasible
  // Achievable side at the same log factor: 3 log₂(4/Δ) · program(τ = budget / log₂(4/Δ)).
  double upper_labels = 0.0;
  bool upper_feasible = false;
};

std::vector<TradeoffPoint> lower_bound_label_curve(const Instance& inst, double delta,
                                                   const std::vector<double>& budgets,
                                                   bool theorem_form = false, bool with_upper = true);

std::string tradeoff_csv(const std::vector<TradeoffPoint>& pts);

// ---- classification ----

// Index of the unique π-risk minimizer; DegenerateInstance on ties.
int best_hypothesis(const ClassificationInstance& ci);
double disagreement_mass(const ClassificationInstance& ci, int h, int g);  // ν-mass where h ≠ g
double disagreement_coefficient(const ClassificationInstance& ci, double u);
double rho_pi(const ClassificationInstance& ci, const DesignWeights& lam, double eps);

struct ClassificationBound {
  double design_form = 0.0;
  double disagreement_form = 0.0;  // NaN unless π = ν
  double beta = 0.0;
};

ClassificationBound classification_label_bound(const ClassificationInstance& ci, double eps, double delta,
                                               double tau, double beta_scale = 1.0);

}  // namespace selsamp
