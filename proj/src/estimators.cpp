#include "selsamp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "selsamp/errors.hpp"

namespace selsamp {

namespace {

double psi(double t) { return std::copysign(std::log1p(std::abs(t) + 0.5 * t * t), t); }
double dpsi(double t) {
  const double a = std::abs(t);
  return (1.0 + a) / (1.0 + a + 0.5 * t * t);
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("robust mean: delta must lie in (0, 1)");
}

double catoni(const std::vector<double>& xs, long zeros, double delta) {
  const double n = static_cast<double>(xs.size()) + zeros;
  const double L = std::log(1.0 / delta);
  if (!(n > 2.0 * L)) {
    std::ostringstream os;
    os << "catoni: need n > 2 log(1/delta) = " << 2.0 * L << ", got " << n;
    throw InsufficientSamples(os.str());
  }
  double lo = zeros > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  double hi = zeros > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double x : xs) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  const double mean = sum / n;
  if (lo == hi) return lo;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  ss += zeros * mean * mean;
  const double var = ss / (n - 1.0);
  const double alpha = std::sqrt(2.0 * L / (n * var * (1.0 + 2.0 * L / (n - 2.0 * L))));

  auto eval = [&](double m, double& f, double& df) {
    f = 0.0;
    df = 0.0;
    for (double x : xs) {
      const double t = alpha * (x - m);
      f += psi(t);
      df += dpsi(t);
    }
    if (zeros > 0) {
      const double t = -alpha * m;
      f += zeros * psi(t);
      df += zeros * dpsi(t);
    }
    df *= -alpha;
  };
  // Safeguarded Newton inside the bracket [lo, hi]; f is decreasing in m.
  const double width_tol = 1e-13 * (hi - lo);
  double m = std::clamp(mean, lo, hi);
  for (int it = 0; it < 200 && hi - lo > width_tol; ++it) {
    double f, df;
    eval(m, f, df);
    if (f == 0.0) return m;
    if (f > 0.0) lo = m;
    else hi = m;
    double next = df < 0.0 ? m - f / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - m) <= width_tol) {
      m = next;
      break;
    }
    m = next;
  }
  return m;
}

double median_of_means(const std::vector<double>& xs, long zeros, double delta) {
  const long n = static_cast<long>(xs.size()) + zeros;
  const double L = std::log(1.0 / delta);
  const long need = 8 * static_cast<long>(std::ceil(L));
  if (n < need) {
    std::ostringstream os;
    os << "median of means: need n >= 8 ceil(log(1/delta)) = " << need << ", got " << n;
    throw InsufficientSamples(os.str());
  }
  const long k = std::max(1L, static_cast<long>(std::ceil(8.0 * L)));
  std::vector<double> means;
  long pos = 0;
  for (long b = 0; b < k; ++b) {
    const long len = n / k + (b < n % k ? 1 : 0);
    double s = 0.0;
    for (long i = pos; i < pos + len; ++i) s += i < static_cast<long>(xs.size()) ? xs[i] : 0.0;
    means.push_back(s / len);
    pos += len;
  }
  std::sort(means.begin(), means.end());
  const size_t h = means.size() / 2;
  return means.size() % 2 ? means[h] : 0.5 * (means[h - 1] + means[h]);
}

}  // namespace

double robust_mean_with_zeros(const std::vector<double>& samples, long zeros, const RobustMeanConfig& cfg) {
  check_delta(cfg.delta);
  for (double x : samples)
    if (!std::isfinite(x)) throw InvalidInput("robust mean: non-finite sample");
  return cfg.method == RobustMethod::catoni ? catoni(samples, zeros, cfg.delta)
                                            : median_of_means(samples, zeros, cfg.delta);
}

double robust_mean(const std::vector<double>& samples, const RobustMeanConfig& cfg) {
  return robust_mean_with_zeros(samples, 0, cfg);
}

double rips_objective(const Vec& theta, const std::vector<Vec>& directions, const std::vector<double>& w,
                      const std::vector<double>& norms) {
  double j = 0.0;
  for (size_t k = 0; k < directions.size(); ++k)
    j = std::max(j, std::abs(w[k] - theta.dot(directions[k])) / norms[k]);
  return j;
}

Vec rips_fit(const std::vector<Vec>& directions, const std::vector<double>& w,
             const std::vector<double>& norms, double* initial_objective) {
  const int d = static_cast<int>(directions[0].size());
  const int m = static_cast<int>(directions.size());
  Mat a(m, d);
  Vec b(m);
  for (int k = 0; k < m; ++k) {
    a.row(k) = directions[k].transpose() / norms[k];
    b(k) = w[k] / norms[k];
  }
  Vec theta = a.completeOrthogonalDecomposition().solve(b);
  double best = rips_objective(theta, directions, w, norms);
  if (initial_objective) *initial_objective = best;
  Vec best_theta = theta;
  if (best == 0.0 || m == 1) return best_theta;

  // Subgradient descent with a Polyak step toward a moving target level.
  double target_gap = 0.5 * best;
  double last_check = best;
  int since_progress = 0;
  for (int it = 0; it < 20000; ++it) {
    int arg = 0;
    double jmax = -1.0, sgn = 1.0;
    for (int k = 0; k < m; ++k) {
      const double r = (w[k] - theta.dot(directions[k])) / norms[k];
      if (std::abs(r) > jmax) {
        jmax = std::abs(r);
        arg = k;
        sgn = r > 0 ? 1.0 : -1.0;
      }
    }
    Vec g = -sgn * a.row(arg).transpose();
    const double gn = g.squaredNorm();
    if (gn == 0.0) break;
    const double level = best - target_gap;
    theta -= ((jmax - level) / gn) * g;
    const double j = rips_objective(theta, directions, w, norms);
    if (j < best - 1e-12 * (1.0 + best)) {
      best = j;
      best_theta = theta;
      since_progress = 0;
    } else if (++since_progress >= 50) {
      target_gap *= 0.5;
      theta = best_theta;
      since_progress = 0;
    }
    if (it % 500 == 499) {
      if (last_check - best < 1e-8 * (1.0 + best)) break;
      last_check = best;
    }
    if (target_gap < 1e-12 * (1.0 + best)) break;
  }
  return best_theta;
}

RipsResult rips_estimate(const std::vector<LabeledDraw>& draws, const std::vector<Vec>& support,
                         const SymMatrix& cov, const std::vector<Vec>& directions, double delta,
                         RobustMethod method) {
  if (directions.empty()) throw InvalidInput("rips: empty direction set");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("rips: delta must lie in (0, 1)");
  const double nv = static_cast<double>(directions.size());
  const double need = 4.0 * std::log(2.0 * nv / delta);
  if (!(static_cast<double>(draws.size()) >= need)) {
    std::ostringstream os;
    os << "rips: need n >= 4 log(2|V|/delta) = " << need << ", got " << draws.size();
    throw InsufficientSamples(os.str());
  }
  RipsResult res;
  const RobustMeanConfig cfg{method, delta / nv};
  std::vector<double> vals;
  vals.reserve(draws.size());
  for (const auto& v : directions) {
    Vec sv = solve_sym(cov, v);
    const double vn = std::sqrt(std::max(v.dot(sv), 0.0));
    std::vector<double> coef(support.size());
    for (size_t i = 0; i < support.size(); ++i) coef[i] = sv.dot(support[i]);
    vals.clear();
    long zeros = 0;
    for (const auto& dr : draws) {
      if (dr.queried) vals.push_back(coef[dr.point] * dr.y);
      else ++zeros;
    }
    // Unqueried draws are zeros. Median of means is order sensitive, so keep them in place there.
    if (method == RobustMethod::median_of_means && zeros > 0) {
      vals.clear();
      for (const auto& dr : draws) vals.push_back(dr.queried ? coef[dr.point] * dr.y : 0.0);
      zeros = 0;
    }
    res.direction_means.push_back(robust_mean_with_zeros(vals, zeros, cfg));
    res.direction_bounds.push_back(vn);
  }
  res.theta_hat = rips_fit(directions, res.direction_means, res.direction_bounds, &res.initial_objective);
  res.achieved_objective = rips_objective(res.theta_hat, directions, res.direction_means, res.direction_bounds);
  return res;
}

CovarianceEstimate empirical_covariance(const SelectionRule& rule, const std::vector<Vec>& samples,
                                        const SymMatrix* exact) {
  const int d = rule.lambda_mat.dim();
  if (static_cast<int>(samples.size()) < d) throw InsufficientSamples("empirical covariance: need at least d samples");
  SymMatrix s(d);
  for (const auto& x : samples) s.add_outer(x, selection_prob(rule, x));
  s *= 1.0 / samples.size();
  CovarianceEstimate out{s, std::numeric_limits<double>::quiet_NaN()};
  if (exact) {
    SymMatrix r = inv_sqrt_pd(*exact);
    SymMatrix m(Mat(r.mat() * s.mat() * r.mat()));
    Eig e = eig_sym(m);
    out.sandwich_gamma = std::max(std::abs(e.values(0) - 1.0), std::abs(e.values(e.values.size() - 1) - 1.0));
  }
  return out;
}

double beta_constant(const BetaParams& p, BetaVariant variant) {
  if (!(p.delta > 0.0 && p.delta < 1.0)) throw InvalidInput("beta: delta must lie in (0, 1)");
  if (p.round < 1 || p.num_arms < 1) throw InvalidInput("beta: round and num_arms must be >= 1");
  if (!(p.scale > 0.0)) throw InvalidInput("beta: scale must be positive");
  const double l2 = static_cast<double>(p.round) * p.round;
  const double z2 = static_cast<double>(p.num_arms) * p.num_arms;
  const double bs = p.bound_B * p.bound_B + p.sigma * p.sigma;
  switch (variant) {
    case BetaVariant::round:
      return p.scale * 16.0 * bs * std::log(2.0 * l2 * z2 / p.delta);
    case BetaVariant::global:
      return p.scale * 1024.0 * bs * std::log(2.0 * l2 * z2 / p.delta);
    case BetaVariant::classification: {
      if (!(p.eps > 0.0)) throw InvalidInput("beta: eps must be positive");
      const double lg = std::log2(4.0 / p.eps);
      return p.scale * 2048.0 * std::log(4.0 * lg * lg * p.num_arms / p.delta);
    }
  }
  return 0.0;
}

}  // namespace selsamp
