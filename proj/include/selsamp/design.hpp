#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selsamp/instance.hpp"
#include "selsamp/linalg.hpp"

namespace selsamp {

using DesignWeights = std::vector<double>;

// ---- ρ and the finite design program --------------------------------------

// One constraint per competitor: vᵀ A(λ)⁻¹ v / denom ≤ value.
struct DesignProblem {
  std::vector<Vec> points;
  std::vector<double> nu;
  std::vector<Vec> dirs;      // z − z*
  std::vector<double> denom;  // max{gap², ε²}
};

// Competitors are `active` \ {z*}; z* comes from θ* over all arms of `inst`.
DesignProblem make_design_problem(const Instance& inst, double eps,
                                  const std::vector<int>& active = {});

SymMatrix design_matrix(const std::vector<Vec>& points, const DesignWeights& lam);
double rho(const DesignProblem& prob, const DesignWeights& lam);
double rho(const Instance& inst, const DesignWeights& lam, double eps);

// ---- selection rule --------------------------------------------------------

struct SelectionRule {
  SymMatrix lambda_mat;
  double barrier_mu = 0.0;
};

// P as a function of q = xᵀΛx − 1, and its complement 1 − P, both computed
// without cancellation.
double selection_prob_q(double q, double mu);
double selection_comp_q(double q, double mu);
double selection_prob(const SelectionRule& rule, const Vec& x);

std::string rule_to_json(const SelectionRule& rule);

// ---- dual objective -------------------------------------------------------

struct DualState {
  std::vector<SymMatrix> shares;  // Λ_y
  std::vector<Vec> directions;    // Y
  double radius_c = 1.0;

  SymMatrix total() const;
  static DualState zeros(const std::vector<Vec>& dirs, double c);
};

// Finite expectation: exact ν or an empirical sample collapsed to counts.
struct WeightedPoints {
  std::vector<Vec> points;
  std::vector<double> weights;  // sums to 1
};
WeightedPoints exact_support(const Instance& inst);
WeightedPoints empirical_points(const std::vector<Vec>& support, const std::vector<int>& draws);

double h_value(const SymMatrix& lam, double mu, const Vec& x);
double dual_value(const DualState& state, double mu, const WeightedPoints& ex);
std::vector<SymMatrix> dual_gradient(const DualState& state, double mu, const Vec& x);
std::vector<SymMatrix> dual_gradient_exact(const DualState& state, double mu, const WeightedPoints& ex);

// Pairwise differences of the given arms, deduplicated up to sign.
std::vector<Vec> direction_set(const std::vector<Vec>& arms);

// c² = τ ε² / β
double round_radius(double tau, double eps, double beta);

// ---- assignment SDP and its dual -----------------------------------------

double sdp_gap_tol(double objective);

struct AssignmentSolution {
  std::vector<SymMatrix> shares;
  double primal = 0.0;   // Σ yᵀ Λ_y y
  SymMatrix gamma;       // dual certificate, Γ ⪰ yyᵀ for every y
  double dual = 0.0;     // ⟨Γ, Λ⟩
  double residual = 0.0; // ‖Σ Λ_y − Λ‖_F
  int iters = 0;
};

// Reusable ADMM state for repeated solves at nearby Λ (warm start).
struct AssignmentWarm {
  std::vector<SymMatrix> x;
  SymMatrix u;
  double rho = 1.0;
  bool valid = false;
};

AssignmentSolution solve_assignment(const SymMatrix& lam, const std::vector<Vec>& dirs,
                                    AssignmentWarm* warm = nullptr, int max_iters = 50000);
std::vector<SymMatrix> assign_dual_shares(const SymMatrix& lam, const std::vector<Vec>& dirs);

// f(Λ) = min Σ yᵀΛ_y y over shares summing to Λ, with Γ the dual certificate (Γ ⪰ yyᵀ, ⟨Γ, Λ⟩ = f).
struct FDual {
  double value;
  SymMatrix gamma;
};
FDual f_dual_value(const SymMatrix& lam, const std::vector<Vec>& dirs,
                   AssignmentWarm* warm = nullptr);

// ---- stream sources and the stochastic solvers ---------------------------

class StreamSource {
 public:
  static StreamSource fresh(std::vector<Vec> support, std::vector<double> probs);
  // Cycles through recorded support indices in order.
  static StreamSource replay(std::vector<Vec> support, std::vector<int> history);

  int next(Rng& rng);
  const Vec& point(int i) const { return support_[i]; }
  const std::vector<Vec>& support() const { return support_; }
  // Exact expectation when the distribution is known.
  const std::optional<WeightedPoints>& exact() const { return exact_; }

 private:
  std::vector<Vec> support_;
  std::optional<StreamSampler> sampler_;
  std::optional<WeightedPoints> exact_;
  std::vector<int> history_;
  size_t pos_ = 0;
};

struct DesignCertificate {
  double max_violation = 0.0;  // max_y yᵀ Σ_P⁻¹ y / c²
  double primal_cost = 0.0;    // E[P]
  double dual_value = 0.0;
  long iters_used = 0;
  bool degenerate = false;     // every stochastic gradient was zero
};

std::string certificate_to_json(const DesignCertificate& cert);

struct SgaOptions {
  long iters = 20000;
  long rescale_samples = 20000;
  double mu_b = 2e-5;
  bool record_steps = false;
  // Use exact ν (when the source knows it) for the rescale line search.
  bool exact_rescale = false;
  // Replace the sampled x_k by the exact expectation over ν (deterministic ascent).
  bool exact_gradient = false;
};

struct DesignResult {
  SelectionRule rule;
  DesignCertificate cert;
  std::vector<SymMatrix> shares;  // s*·Λ̂_y
  double rescale = 1.0;
  std::vector<double> step_sizes;
};

// Projected stochastic gradient ascent on the per-direction shares.
DesignResult optimize_design_sga(const std::vector<Vec>& dirs, double c, StreamSource& source,
                                 Rng& rng, const SgaOptions& opt);
// Stochastic subgradient ascent on a single Λ through f.
DesignResult optimize_design_subgrad(const std::vector<Vec>& dirs, double c, StreamSource& source,
                                     Rng& rng, const SgaOptions& opt);

// argmax_{s∈[0,1]} D_E(s·Λ̂) where f_value = Σ yᵀ Λ̂_y y.
double rescale_line_search(const SymMatrix& lam_hat, double f_value, double c, double mu,
                           const WeightedPoints& samples);

DesignCertificate certify(const SelectionRule& rule, const std::vector<Vec>& dirs, double c,
                          const WeightedPoints& ex, const DualState* state = nullptr);

// Σ_P = E[P(X) X Xᵀ] and E[P] under a selection rule.
SymMatrix selected_covariance(const SelectionRule& rule, const WeightedPoints& ex);

// ---- exact designs ---------------------------------------------------------

struct OracleDesign {
  std::vector<double> p;  // P*(x) per support point
  double cost = 0.0;      // τ Σ ν P*
  DesignWeights lambda;
  double cap = 1.0;       // ‖λ/ν‖∞
  double residual = 0.0;  // constraint value − 1 at P*
};

struct ReparamSolution {
  DesignWeights lambda;
  double value = 0.0;     // ρ(λ)·β
  double cap = 1.0;       // ‖λ/ν‖∞
};

// min over the capped simplex {λ ≤ cap·ν} of ρ(λ). cap ≤ 0 means no cap.
// Mirror-prox on the saddle form min_λ max_w Σ w_z g_z(λ); entropic or
// Euclidean geometry. `init` warm-starts λ (must lie in the capped simplex).
// Stops early once a certified relative duality gap falls below `gap_tol`.
ReparamSolution min_rho_capped(const DesignProblem& prob, double cap, bool entropic = true,
                               int iters = 10000, const DesignWeights* init = nullptr,
                               double gap_tol = 1e-7);

OracleDesign oracle_design(const DesignProblem& prob, double tau, double beta);
OracleDesign oracle_design(const Instance& inst, double eps, double tau, double beta);
ReparamSolution reparam_program(const DesignProblem& prob, double tau, double beta);
ReparamSolution reparam_program(const Instance& inst, double tau, double beta, double eps);

}  // namespace selsamp
