#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "selsamp/design.hpp"
#include "selsamp/errors.hpp"

namespace selsamp {

// ---- ρ ---------------------------------------------------------------------

DesignProblem make_design_problem(const Instance& inst, double eps, const std::vector<int>& active) {
  if (eps < 0.0) throw InvalidInput("design problem: eps must be >= 0");
  std::vector<int> act = active;
  if (act.empty())
    for (int i = 0; i < inst.num_arms(); ++i) act.push_back(i);
  // z* is the best arm overall; it is always compared against, active or not.
  std::vector<double> val;
  for (const auto& z : inst.arms) val.push_back(z.dot(inst.theta_star));
  int best = static_cast<int>(std::max_element(val.begin(), val.end()) - val.begin());
  DesignProblem p;
  p.points = inst.stream_points;
  p.nu = inst.stream_probs;
  for (int a : act) {
    if (a == best) continue;
    Vec v = inst.arms[a] - inst.arms[best];
    if (v.lpNorm<Eigen::Infinity>() == 0.0) continue;
    double gap = val[best] - val[a];
    double den = std::max(gap * gap, eps * eps);
    if (!(den > 0.0)) throw DegenerateInstance("design problem: zero gap with eps = 0");
    p.dirs.push_back(v);
    p.denom.push_back(den);
  }
  return p;
}

SymMatrix design_matrix(const std::vector<Vec>& points, const DesignWeights& lam) {
  return weighted_second_moment(points, lam);
}

namespace {

// vᵀ A⁺ v, or +inf when v leaves the range of A.
double quad_pinv(const Eig& e, const Vec& v) {
  const double top = std::max(e.values.cwiseAbs().maxCoeff(), 1e-300);
  double q = 0.0;
  for (int k = 0; k < e.values.size(); ++k) {
    double c = e.vectors.col(k).dot(v);
    if (e.values(k) <= 1e-12 * top) {
      if (std::abs(c) > 1e-10 * (1.0 + v.norm())) return std::numeric_limits<double>::infinity();
      continue;
    }
    q += c * c / e.values(k);
  }
  return q;
}

}  // namespace

double rho(const DesignProblem& prob, const DesignWeights& lam) {
  if (lam.size() != prob.points.size()) throw InvalidInput("rho: weights/support length mismatch");
  if (prob.dirs.empty()) return 0.0;
  Eig e = eig_sym(design_matrix(prob.points, lam));
  double r = 0.0;
  for (size_t k = 0; k < prob.dirs.size(); ++k) {
    double q = quad_pinv(e, prob.dirs[k]);
    if (std::isinf(q)) throw SingularMatrix("rho: design matrix is singular in a needed direction");
    r = std::max(r, q / prob.denom[k]);
  }
  return r;
}

double rho(const Instance& inst, const DesignWeights& lam, double eps) {
  return rho(make_design_problem(inst, eps), lam);
}

// ---- selection rule ------------------------------------------------------

namespace {

// The side of P (or 1 − P) that is below 1/2, for |q| ≥ 1e-12 and μ > 0.
double small_side(double q, double mu, double s) {
  return (4.0 * mu * mu / (s + std::abs(q)) + 2.0 * mu) / (2.0 * (s + 2.0 * mu));
}

}  // namespace

double selection_prob_q(double q, double mu) {
  if (mu == 0.0) return q > 0.0 ? 1.0 : (q < 0.0 ? 0.0 : 0.5);
  if (std::abs(q) < 1e-12) return 0.5;
  const double s = std::hypot(q, 2.0 * mu);
  if (q < 0.0) return small_side(q, mu, s);
  double p = 0.5 + q / (2.0 * (s + 2.0 * mu));
  return p < 1.0 ? p : std::nextafter(1.0, 0.0);
}

double selection_comp_q(double q, double mu) {
  if (mu == 0.0) return 1.0 - selection_prob_q(q, mu);
  if (std::abs(q) < 1e-12) return 0.5;
  const double s = std::hypot(q, 2.0 * mu);
  if (q > 0.0) return std::max(small_side(q, mu, s), std::numeric_limits<double>::denorm_min());
  return 0.5 + std::abs(q) / (2.0 * (s + 2.0 * mu));
}

double selection_prob(const SelectionRule& rule, const Vec& x) {
  return selection_prob_q(rule.lambda_mat.quad(x) - 1.0, rule.barrier_mu);
}

std::string rule_to_json(const SelectionRule& rule) {
  nlohmann::json j;
  j["dim"] = rule.lambda_mat.dim();
  std::vector<double> flat;
  for (int i = 0; i < rule.lambda_mat.dim(); ++i)
    for (int k = 0; k < rule.lambda_mat.dim(); ++k) flat.push_back(rule.lambda_mat(i, k));
  j["lambda_mat"] = flat;
  j["barrier_mu"] = rule.barrier_mu;
  return j.dump();
}

// ---- dual ----------------------------------------------------------------

SymMatrix DualState::total() const {
  SymMatrix t(static_cast<int>(directions.at(0).size()));
  for (const auto& s : shares) t += s;
  return t;
}

DualState DualState::zeros(const std::vector<Vec>& dirs, double c) {
  if (dirs.empty()) throw InvalidInput("dual state: empty direction set");
  DualState st;
  st.directions = dirs;
  st.radius_c = c;
  st.shares.assign(dirs.size(), SymMatrix(static_cast<int>(dirs[0].size())));
  return st;
}

WeightedPoints exact_support(const Instance& inst) {
  return {inst.stream_points, inst.stream_probs};
}

WeightedPoints empirical_points(const std::vector<Vec>& support, const std::vector<int>& draws) {
  if (draws.empty()) throw InsufficientSamples("empirical points: no samples");
  std::vector<double> count(support.size(), 0.0);
  for (int i : draws) count.at(i) += 1.0;
  WeightedPoints wp;
  for (size_t i = 0; i < support.size(); ++i) {
    if (count[i] == 0.0) continue;
    wp.points.push_back(support[i]);
    wp.weights.push_back(count[i] / draws.size());
  }
  return wp;
}

double h_value(const SymMatrix& lam, double mu, const Vec& x) {
  const double xl = lam.quad(x);
  const double q = xl - 1.0;
  const double p = selection_prob_q(q, mu);
  if (mu == 0.0) return p * (1.0 - xl);
  const double c = selection_comp_q(q, mu);
  if (!(p > 0.0) || !(c > 0.0)) throw InternalConsistency("dual value: selection probability left (0, 1)");
  return p - mu * (std::log(c) + std::log(p)) - p * xl;
}

double dual_value(const DualState& state, double mu, const WeightedPoints& ex) {
  SymMatrix lam = state.total();
  double d = 0.0;
  for (size_t i = 0; i < ex.points.size(); ++i) d += ex.weights[i] * h_value(lam, mu, ex.points[i]);
  const double c2 = state.radius_c * state.radius_c;
  for (size_t k = 0; k < state.shares.size(); ++k) d += state.shares[k].quad(state.directions[k]) / c2;
  return d;
}

std::vector<SymMatrix> dual_gradient(const DualState& state, double mu, const Vec& x) {
  SymMatrix lam = state.total();
  const double p = selection_prob(SelectionRule{lam, mu}, x);
  const double c2 = state.radius_c * state.radius_c;
  std::vector<SymMatrix> g;
  for (const auto& y : state.directions) {
    SymMatrix gy(static_cast<int>(y.size()));
    gy.add_outer(y, 1.0 / c2);
    gy.add_outer(x, -p);
    g.push_back(gy);
  }
  return g;
}

std::vector<SymMatrix> dual_gradient_exact(const DualState& state, double mu, const WeightedPoints& ex) {
  SelectionRule rule{state.total(), mu};
  SymMatrix sp = selected_covariance(rule, ex);
  const double c2 = state.radius_c * state.radius_c;
  std::vector<SymMatrix> g;
  for (const auto& y : state.directions) {
    SymMatrix gy = SymMatrix::outer(y);
    gy *= 1.0 / c2;
    gy -= sp;
    g.push_back(gy);
  }
  return g;
}

SymMatrix selected_covariance(const SelectionRule& rule, const WeightedPoints& ex) {
  SymMatrix s(rule.lambda_mat.dim());
  for (size_t i = 0; i < ex.points.size(); ++i)
    s.add_outer(ex.points[i], ex.weights[i] * selection_prob(rule, ex.points[i]));
  return s;
}

std::vector<Vec> direction_set(const std::vector<Vec>& arms) {
  std::vector<Vec> out;
  for (size_t i = 0; i < arms.size(); ++i) {
    for (size_t j = i + 1; j < arms.size(); ++j) {
      Vec v = arms[i] - arms[j];
      const double n = v.norm();
      if (n == 0.0) continue;
      bool dup = false;
      for (const auto& w : out) {
        if ((w - v).norm() <= 1e-14 * n || (w + v).norm() <= 1e-14 * n) {
          dup = true;
          break;
        }
      }
      if (!dup) out.push_back(v);
    }
  }
  return out;
}

double round_radius(double tau, double eps, double beta) {
  if (!(tau > 0.0) || !(eps > 0.0) || !(beta > 0.0)) throw InvalidInput("round_radius: arguments must be positive");
  return std::sqrt(tau * eps * eps / beta);
}

// ---- stream sources ------------------------------------------------------

StreamSource StreamSource::fresh(std::vector<Vec> support, std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size()) throw InvalidInput("stream source: bad support");
  StreamSource s;
  s.sampler_.emplace(probs);
  s.exact_ = WeightedPoints{support, probs};
  s.support_ = std::move(support);
  return s;
}

StreamSource StreamSource::replay(std::vector<Vec> support, std::vector<int> history) {
  if (support.empty() || history.empty()) throw InvalidInput("stream source: empty replay history");
  for (int i : history)
    if (i < 0 || i >= static_cast<int>(support.size())) throw InvalidInput("stream source: replay index out of range");
  StreamSource s;
  s.support_ = std::move(support);
  s.history_ = std::move(history);
  return s;
}

int StreamSource::next(Rng& rng) {
  if (sampler_) return sampler_->draw(rng);
  int i = history_[pos_];
  pos_ = (pos_ + 1) % history_.size();
  return i;
}

// ---- certificates ----------------------------------------------------------

DesignCertificate certify(const SelectionRule& rule, const std::vector<Vec>& dirs, double c,
                          const WeightedPoints& ex, const DualState* state) {
  DesignCertificate cert;
  SymMatrix sp = selected_covariance(rule, ex);
  double viol = 0.0;
  for (const auto& y : dirs) {
    double q;
    try {
      q = quad_form_inv(sp, y, 0.0);
    } catch (const SingularMatrix&) {
      q = std::numeric_limits<double>::infinity();
    }
    viol = std::max(viol, q / (c * c));
  }
  cert.max_violation = viol;
  double cost = 0.0;
  for (size_t i = 0; i < ex.points.size(); ++i) cost += ex.weights[i] * selection_prob(rule, ex.points[i]);
  cert.primal_cost = std::min(cost, 1.0);
  cert.dual_value = state ? dual_value(*state, rule.barrier_mu, ex) : std::numeric_limits<double>::quiet_NaN();
  return cert;
}

std::string certificate_to_json(const DesignCertificate& cert) {
  nlohmann::json j;
  j["max_violation"] = cert.max_violation;
  j["primal_cost"] = cert.primal_cost;
  j["dual_value"] = cert.dual_value;
  j["iters_used"] = cert.iters_used;
  return j.dump();
}

}  // namespace selsamp
