#include "selsamp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selsamp/errors.hpp"
#include "selsamp/estimators.hpp"
#include "selsamp/sampler.hpp"

namespace selsamp {

double lower_log_factor(double delta, bool theorem_form) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  return std::max(0.0, std::log(1.0 / ((theorem_form ? 1.0 : 2.4) * delta)));
}

double lower_bound_unlabeled(const Instance& inst, double delta, bool theorem_form) {
  inst.validate();
  return rho(inst, inst.stream_probs, 0.0) * lower_log_factor(delta, theorem_form);
}

namespace {

double linf_ratio(const DesignWeights& lam, const std::vector<double>& nu) {
  double r = 0.0;
  for (size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] <= 0.0) continue;
    r = std::max(r, nu[i] > 0.0 ? lam[i] / nu[i] : std::numeric_limits<double>::infinity());
  }
  return r;
}

}  // namespace

std::vector<TradeoffPoint> lower_bound_label_curve(const Instance& inst, double delta,
                                                   const std::vector<double>& budgets, bool theorem_form,
                                                   bool with_upper) {
  inst.validate();
  const double logf = lower_log_factor(delta, theorem_form);
  if (!(logf > 0.0)) throw InvalidInput("tradeoff: log factor vanishes for this delta");
  const DesignProblem prob = make_design_problem(inst, 0.0);
  const double rounds = std::log2(4.0 / gap_and_best(inst).gap);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<TradeoffPoint> out;
  for (double b : budgets) {
    if (!(b > 0.0)) throw InvalidInput("tradeoff: budgets must be positive");
    TradeoffPoint pt;
    pt.unlabeled_budget = b;
    try {
      ReparamSolution s = reparam_program(prob, b, logf);
      pt.feasible = true;
      pt.min_labels = s.value;
      pt.witness_lambda = s.lambda;
      pt.witness_linf_ratio = linf_ratio(s.lambda, inst.stream_probs);
    } catch (const Infeasible&) {
      pt.min_labels = inf;
      pt.witness_linf_ratio = std::numeric_limits<double>::quiet_NaN();
    }
    pt.upper_labels = inf;
    if (with_upper) {
      try {
        pt.upper_labels = 3.0 * rounds * reparam_program(prob, b / rounds, logf).value;
        pt.upper_feasible = true;
      } catch (const Infeasible&) {
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

std::string tradeoff_csv(const std::vector<TradeoffPoint>& pts) {
  std::string s = "budget,min_labels,feasible,witness_linf_ratio,upper_labels,upper_feasible\n";
  for (const auto& p : pts) {
    s += format_double(p.unlabeled_budget) + ',' + format_double(p.min_labels) + ',' + (p.feasible ? "1" : "0") +
         ',' + format_double(p.witness_linf_ratio) + ',' + format_double(p.upper_labels) + ',' +
         (p.upper_feasible ? "1" : "0") + '\n';
  }
  return s;
}

int best_hypothesis(const ClassificationInstance& ci) {
  ci.validate();
  const int nh = static_cast<int>(ci.hypotheses.size());
  int best = 0;
  for (int h = 1; h < nh; ++h)
    if (classification_risk(ci, h) < classification_risk(ci, best)) best = h;
  for (int h = 0; h < nh; ++h)
    if (h != best && std::abs(classification_risk(ci, h) - classification_risk(ci, best)) <= 1e-12)
      throw DegenerateInstance("classification: risk minimizer is not unique");
  return best;
}

double disagreement_mass(const ClassificationInstance& ci, int h, int g) {
  double m = 0.0;
  for (size_t x = 0; x < ci.nu_probs.size(); ++x)
    if (ci.hypotheses[h][x] != ci.hypotheses[g][x]) m += ci.nu_probs[x];
  return m;
}

double disagreement_coefficient(const ClassificationInstance& ci, double u) {
  if (!(u > 0.0)) throw InvalidInput("disagreement coefficient: u must be positive");
  const int hs = best_hypothesis(ci);
  const int nh = static_cast<int>(ci.hypotheses.size());
  const size_t nx = ci.nu_probs.size();
  std::vector<double> dist(nh);
  for (int h = 0; h < nh; ++h) dist[h] = disagreement_mass(ci, h, hs);
  // ν(DIS(r)) only changes at achieved distances, and mass/r falls between them.
  std::vector<double> radii{u};
  for (int h = 0; h < nh; ++h)
    if (h != hs && dist[h] >= u) radii.push_back(dist[h]);
  double best = 0.0;
  for (double r : radii) {
    double mass = 0.0;
    for (size_t x = 0; x < nx; ++x) {
      for (int h = 0; h < nh; ++h) {
        if (h != hs && dist[h] <= r && ci.hypotheses[h][x] != ci.hypotheses[hs][x]) {
          mass += ci.nu_probs[x];
          break;
        }
      }
    }
    best = std::max(best, mass / r);
  }
  return best;
}

double rho_pi(const ClassificationInstance& ci, const DesignWeights& lam, double eps) {
  return rho(classification_to_bandit(ci).instance, lam, eps);
}

ClassificationBound classification_label_bound(const ClassificationInstance& ci, double eps, double delta,
                                               double tau, double beta_scale) {
  if (!(eps > 0.0)) throw InvalidInput("classification bound: eps must be positive");
  const int hs = best_hypothesis(ci);
  const Instance inst = classification_to_bandit(ci).instance;
  BetaParams bp;
  bp.delta = delta;
  bp.num_arms = static_cast<int>(ci.hypotheses.size());
  bp.eps = eps;
  bp.scale = beta_scale;
  ClassificationBound out;
  out.beta = beta_constant(bp, BetaVariant::classification);
  const double need = 16.0 * rho(inst, ci.nu_probs, eps) * out.beta;
  if (tau < need) {
    std::ostringstream os;
    os << "classification bound needs tau >= " << need << ", got " << tau;
    throw Infeasible(os.str(), need);
  }
  const double rounds = std::log2(4.0 / eps);
  out.design_form = 3.0 * rounds * reparam_program(inst, tau, out.beta, eps).value;

  bool same = true;
  for (size_t x = 0; x < ci.nu_probs.size(); ++x) same = same && std::abs(ci.nu_probs[x] - ci.pi_probs[x]) <= 1e-12;
  if (!same) {
    out.disagreement_form = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // θ*(·, ν) is non-increasing, so the sup over ξ ≥ ε sits at ξ = ε.
  const double r = classification_risk(ci, hs);
  out.disagreement_form = 36.0 * rounds * (r * r / (eps * eps) + 4.0) *
                          disagreement_coefficient(ci, 2.0 * r + eps) * out.beta;
  return out;
}

}  // namespace selsamp
