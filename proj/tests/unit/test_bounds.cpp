#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "selsamp/bounds.hpp"
#include "selsamp/errors.hpp"
#include "selsamp/estimators.hpp"

using namespace selsamp;

namespace {

ClassificationInstance thresholds(int n, double left_eta, double right_eta) {
  std::vector<double> eta;
  for (int i = 0; i < n; ++i) eta.push_back(2 * i < n ? left_eta : right_eta);
  return threshold_instance(n, eta, std::vector<double>(n, 1.0 / n), std::vector<double>(n, 1.0 / n));
}

// ν(DIS(r)) / r evaluated from scratch on a fine radius grid.
double brute_coefficient(const ClassificationInstance& ci, int hs, double u) {
  const size_t nx = ci.nu_probs.size();
  double best = 0.0;
  std::vector<double> grid{u};
  for (int k = 1; k <= 1000; ++k)
    if (k / 1000.0 >= u) grid.push_back(k / 1000.0);
  for (double r : grid) {
    double mass = 0.0;
    for (size_t x = 0; x < nx; ++x) {
      bool in = false;
      for (size_t h = 0; h < ci.hypotheses.size(); ++h) {
        double d = 0.0;
        for (size_t y = 0; y < nx; ++y) d += ci.hypotheses[h][y] != ci.hypotheses[hs][y] ? ci.nu_probs[y] : 0.0;
        if (d <= r + 1e-12 && ci.hypotheses[h][x] != ci.hypotheses[hs][x]) in = true;
      }
      if (in) mass += ci.nu_probs[x];
    }
    best = std::max(best, mass / r);
  }
  return best;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("unlabeled lower bound examples") {
  const Instance t = two_point_instance();
  for (double d : {0.01, 0.05, 0.2}) {
    CHECK(lower_bound_unlabeled(t, d) == doctest::Approx(4.0 * std::log(1.0 / (2.4 * d))).epsilon(1e-12));
    CHECK(lower_bound_unlabeled(t, d, true) == doctest::Approx(4.0 * std::log(1.0 / d)).epsilon(1e-12));
  }
  const Instance b = benchmark_instance();
  CHECK(lower_bound_unlabeled(b, 0.05) ==
        doctest::Approx(rho(b, b.stream_probs, 0.0) * std::log(1.0 / 0.12)).epsilon(1e-12));
  double prev = INFINITY;
  for (double d = 0.01; d < 0.4; d += 0.03) {
    const double v = lower_bound_unlabeled(b, d);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(lower_log_factor(0.5) == 0.0);
  CHECK_THROWS_AS(lower_bound_unlabeled(b, 0.0), InvalidInput);
}

TEST_CASE("trade-off curve shape") {
  const Instance b = benchmark_instance();
  const double thr = lower_bound_unlabeled(b, 0.05);
  std::vector<double> budgets;
  for (int i = 0; i < 10; ++i) budgets.push_back(thr * 0.5 * std::pow(400.0, i / 9.0));
  const auto pts = lower_bound_label_curve(b, 0.05, budgets);
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].feasible == (budgets[i] >= thr));
    if (!pts[i].feasible) {
      CHECK(std::isinf(pts[i].min_labels));
      CHECK(std::isnan(pts[i].witness_linf_ratio));
      continue;
    }
    CHECK(pts[i].min_labels <= pts[i].unlabeled_budget);
    if (i > 0 && pts[i - 1].feasible) CHECK(pts[i].min_labels <= pts[i - 1].min_labels * (1 + 1e-9));
    if (pts[i].upper_feasible) CHECK(pts[i].min_labels <= pts[i].upper_labels);
    // witness is feasible for its own budget
    const double logf = lower_log_factor(0.05);
    const double r = rho(b, pts[i].witness_lambda, 0.0);
    CHECK(pts[i].witness_linf_ratio * r * logf <= budgets[i] * (1 + 1e-9));
    CHECK(r * logf == doctest::Approx(pts[i].min_labels).epsilon(1e-9));
  }
  CHECK_THROWS_AS(lower_bound_label_curve(b, 0.05, {-1.0}), InvalidInput);
}

TEST_CASE("trade-off at the threshold stays at nu") {
  const Instance b = benchmark_instance();
  const double thr = lower_bound_unlabeled(b, 0.05);
  const auto pts = lower_bound_label_curve(b, 0.05, {thr * (1 + 1e-12)}, false, false);
  REQUIRE(pts[0].feasible);
  const double rnu = rho(b, b.stream_probs, 0.0);
  const double rl = rho(b, pts[0].witness_lambda, 0.0);
  CHECK(pts[0].witness_linf_ratio * rl <= rnu * (1 + 1e-6));
}

TEST_CASE("trade-off at large budget reaches the pool optimum") {
  const Instance b = benchmark_instance();
  const double logf = lower_log_factor(0.05);
  const DesignProblem prob = make_design_problem(b, 0.0);
  const double pool = oracle::grid_pool_2d(prob.points, prob.dirs, prob.denom) * logf;
  const auto pts = lower_bound_label_curve(b, 0.05, {1e9}, false, false);
  CHECK(pts[0].min_labels == doctest::Approx(pool).epsilon(1e-2));
  CHECK(pts[0].min_labels <= pool * (1 + 1e-6));
}

TEST_CASE("program value is monotone in beta") {
  const Instance b = benchmark_instance();
  const DesignProblem prob = make_design_problem(b, 0.0);
  const double rnu = rho(b, b.stream_probs, 0.0);
  const double tau = 50.0 * rnu;
  double prev = 0.0;
  for (double beta : {1.0, 2.0, 5.0, 20.0}) {
    const double v = reparam_program(prob, tau, beta).value;
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("disagreement coefficient examples") {
  ClassificationInstance one = thresholds(4, 0.9, 0.9);
  one.hypotheses = {one.hypotheses[0]};
  for (double u : {0.01, 0.5, 2.0}) CHECK(disagreement_coefficient(one, u) == 0.0);

  // h* = all +1, h' flips two of five points
  ClassificationInstance two = thresholds(5, 0.9, 0.9);
  two.hypotheses = {two.hypotheses[0], two.hypotheses[2]};
  REQUIRE(best_hypothesis(two) == 0);
  CHECK(disagreement_mass(two, 0, 1) == doctest::Approx(0.4));
  for (double u : {0.05, 0.2, 0.4}) CHECK(disagreement_coefficient(two, u) == doctest::Approx(1.0));
  CHECK(disagreement_coefficient(two, 0.5) == doctest::Approx(0.8));

  const ClassificationInstance ten = thresholds(10, 0.2, 0.8);
  const int hs = best_hypothesis(ten);
  double prev = INFINITY;
  for (double u : {0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 1.0}) {
    const double c = disagreement_coefficient(ten, u);
    CHECK(c == doctest::Approx(brute_coefficient(ten, hs, u)).epsilon(1e-9));
    CHECK(c <= prev);
    prev = c;
  }
  ClassificationInstance tie = thresholds(4, 0.5, 0.5);
  CHECK_THROWS_AS(disagreement_coefficient(tie, 0.1), DegenerateInstance);
  CHECK_THROWS_AS(disagreement_coefficient(ten, 0.0), InvalidInput);
}

TEST_CASE("classification bound") {
  const double eps = 0.1, delta = 0.05;
  const ClassificationInstance ten = thresholds(10, 0.2, 0.8);
  BetaParams bp;
  bp.delta = delta;
  bp.num_arms = static_cast<int>(ten.hypotheses.size());
  bp.eps = eps;
  const double beta = beta_constant(bp, BetaVariant::classification);
  const double need = 16.0 * rho_pi(ten, ten.nu_probs, eps) * beta;
  for (double m : {1.0, 10.0, 1e4}) {
    const ClassificationBound cb = classification_label_bound(ten, eps, delta, need * m);
    CHECK(cb.beta == doctest::Approx(beta));
    CHECK(cb.design_form <= cb.disagreement_form);
  }
  try {
    classification_label_bound(ten, eps, delta, 0.5 * need);
    FAIL("expected Infeasible");
  } catch (const Infeasible& e) {
    CHECK(e.required == doctest::Approx(need));
  }

  // realizable: R(h*) = 0
  const ClassificationInstance clean = thresholds(10, 0.0, 1.0);
  const int hs = best_hypothesis(clean);
  CHECK(classification_risk(clean, hs) == 0.0);
  const double need_c = 16.0 * rho_pi(clean, clean.nu_probs, eps) * beta;
  const ClassificationBound cb = classification_label_bound(clean, eps, delta, need_c);
  CHECK(cb.disagreement_form ==
        doctest::Approx(144.0 * std::log2(4.0 / eps) * disagreement_coefficient(clean, eps) * beta).epsilon(1e-12));
  CHECK(cb.design_form <= cb.disagreement_form);

  // τ → ∞: the constraint is vacuous
  const Instance red = classification_to_bandit(ten).instance;
  const DesignProblem prob = make_design_problem(red, eps);
  const double pool = min_rho_capped(prob, 0.0, true).value;
  const ClassificationBound far = classification_label_bound(ten, eps, delta, 1e15);
  CHECK(far.design_form == doctest::Approx(3.0 * std::log2(4.0 / eps) * pool * beta).epsilon(1e-6));

  // π ≠ ν: only the design form is defined
  ClassificationInstance skew = ten;
  skew.nu_probs = std::vector<double>{0.2, 0.2, 0.1, 0.1, 0.05, 0.05, 0.1, 0.1, 0.05, 0.05};
  const double need_s = 16.0 * rho_pi(skew, skew.nu_probs, eps) * beta;
  CHECK(std::isnan(classification_label_bound(skew, eps, delta, need_s).disagreement_form));
}

TEST_CASE("rho_pi monotone in eps and convex in lambda") {
  const ClassificationInstance ten = thresholds(10, 0.2, 0.8);
  double prev = INFINITY;
  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double r = rho_pi(ten, ten.nu_probs, eps);
    CHECK(r <= prev * (1 + 1e-12));
    prev = r;
  }
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> a(10), b(10), m(10);
    double sa = 0, sb = 0;
    for (int i = 0; i < 10; ++i) sa += a[i] = u(g), sb += b[i] = u(g);
    for (int i = 0; i < 10; ++i) a[i] /= sa, b[i] /= sb, m[i] = 0.5 * (a[i] + b[i]);
    CHECK(rho_pi(ten, m, 0.1) <= 0.5 * (rho_pi(ten, a, 0.1) + rho_pi(ten, b, 0.1)) * (1 + 1e-12));
  }
}

TEST_CASE("tradeoff csv") {
  TradeoffPoint p;
  p.unlabeled_budget = 100.0;
  p.min_labels = INFINITY;
  p.witness_linf_ratio = NAN;
  p.upper_labels = INFINITY;
  CHECK(tradeoff_csv({p}) ==
        "budget,min_labels,feasible,witness_linf_ratio,upper_labels,upper_feasible\n100,inf,0,nan,inf,0\n");
}

}  // TEST_SUITE
