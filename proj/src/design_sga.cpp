#include <cmath>
#include <limits>

#include "selsamp/design.hpp"
#include "selsamp/errors.hpp"

namespace selsamp {

double rescale_line_search(const SymMatrix& lam_hat, double f_value, double c, double mu,
                           const WeightedPoints& samples) {
  const double c2 = c * c;
  auto g = [&](double s) {
    SymMatrix l = s * lam_hat;
    double v = s * f_value / c2;
    for (size_t i = 0; i < samples.points.size(); ++i) v += samples.weights[i] * h_value(l, mu, samples.points[i]);
    return v;
  };
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double g1 = g(x1), g2 = g(x2);
  while (b - a > 1e-4) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + r * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - r * (b - a);
      g1 = g(x1);
    }
  }
  // Polish with bisection on the slope g'(s) = f/c² − E[P_{sΛ} xᵀΛx] (envelope form),
  // which is decreasing since g is concave.
  auto slope = [&](double s) {
    double v = f_value / c2;
    for (size_t i = 0; i < samples.points.size(); ++i) {
      const double q = lam_hat.quad(samples.points[i]);
      v -= samples.weights[i] * selection_prob_q(s * q - 1.0, mu) * q;
    }
    return v;
  };
  double lo = std::max(0.0, a - 1e-4), hi = std::min(1.0, b + 1e-4);
  if (hi == 1.0 && slope(1.0) >= 0.0) return 1.0;
  if (lo == 0.0 && slope(0.0) <= 0.0) return 0.0;
  if (!(slope(lo) > 0.0 && slope(hi) < 0.0)) return 0.5 * (a + b);
  for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

WeightedPoints draw_points(StreamSource& source, Rng& rng, long n) {
  std::vector<int> idx(n);
  for (long i = 0; i < n; ++i) idx[i] = source.next(rng);
  return empirical_points(source.support(), idx);
}

void finish(DesignResult& res, const SymMatrix& avg, const std::vector<Vec>& dirs, double c,
            StreamSource& source, Rng& rng, const SgaOptions& opt) {
  AssignmentSolution sol = solve_assignment(avg, dirs);
  const bool use_exact = opt.exact_rescale && source.exact();
  WeightedPoints samples = use_exact ? *source.exact() : draw_points(source, rng, opt.rescale_samples);
  const double s = rescale_line_search(avg, sol.primal, c, opt.mu_b, samples);
  res.rescale = s;
  res.rule = SelectionRule{s * avg, opt.mu_b};
  res.shares.clear();
  for (const auto& sh : sol.shares) res.shares.push_back(s * sh);
  DualState st;
  st.directions = dirs;
  st.radius_c = c;
  st.shares = res.shares;
  const WeightedPoints held = source.exact() ? *source.exact() : draw_points(source, rng, opt.rescale_samples);
  const bool degenerate = res.cert.degenerate;
  res.cert = certify(res.rule, dirs, c, held, &st);
  res.cert.iters_used = opt.iters;
  res.cert.degenerate = degenerate;
}

void check_args(const std::vector<Vec>& dirs, double c, const SgaOptions& opt) {
  if (dirs.empty()) throw InvalidInput("design solver: empty direction set");
  if (opt.iters < 1 || opt.rescale_samples < 1) throw InvalidInput("design solver: K and u must be >= 1");
  if (!(opt.mu_b > 0.0 && opt.mu_b < 1.0)) throw InvalidInput("design solver: mu_b must lie in (0, 1)");
  if (!(c > 0.0)) throw InvalidInput("design solver: c must be positive");
}

}  // namespace

DesignResult optimize_design_sga(const std::vector<Vec>& dirs, double c, StreamSource& source,
                                 Rng& rng, const SgaOptions& opt) {
  check_args(dirs, c, opt);
  const int d = static_cast<int>(dirs[0].size());
  const int m = static_cast<int>(dirs.size());
  const double c2 = c * c;
  std::vector<SymMatrix> yy;
  std::vector<double> yy_norm2;
  for (const auto& y : dirs) {
    yy.push_back((1.0 / c2) * SymMatrix::outer(y));
    yy_norm2.push_back(yy.back().mat().squaredNorm());
  }
  std::vector<SymMatrix> shares(m, SymMatrix(d));
  SymMatrix total(d), avg(d);
  DesignResult res;
  double gsum = 0.0;
  const WeightedPoints* ex = opt.exact_gradient && source.exact() ? &*source.exact() : nullptr;
  if (ex) {
    for (long k = 0; k < opt.iters; ++k) {
      SymMatrix ep(d);
      for (size_t i = 0; i < ex->points.size(); ++i) {
        const Vec& x = ex->points[i];
        ep.add_outer(x, ex->weights[i] * selection_prob_q(total.quad(x) - 1.0, opt.mu_b));
      }
      std::vector<SymMatrix> g;
      for (int j = 0; j < m; ++j) {
        g.push_back(yy[j] - ep);
        gsum += g.back().mat().squaredNorm();
      }
      if (!(gsum > 0.0)) {
        avg += total;
        continue;
      }
      const double eta = 1.0 / std::sqrt(2.0 * gsum);
      if (opt.record_steps) res.step_sizes.push_back(eta);
      total = SymMatrix(d);
      for (int j = 0; j < m; ++j) {
        shares[j] += eta * g[j];
        shares[j] = psd_project(shares[j]);
        total += shares[j];
      }
      avg += total;
    }
  } else {
    for (long k = 0; k < opt.iters; ++k) {
      const Vec& x = source.point(source.next(rng));
      const double p = selection_prob_q(total.quad(x) - 1.0, opt.mu_b);
      const double xn2 = x.squaredNorm();
      // ‖yyᵀ/c² − P xxᵀ‖²_F summed over y, without forming the matrices
      for (int j = 0; j < m; ++j) {
        const double yx = dirs[j].dot(x);
        gsum += yy_norm2[j] - 2.0 * p * yx * yx / c2 + p * p * xn2 * xn2;
      }
      if (!(gsum > 0.0)) {
        avg += total;
        continue;
      }
      const double eta = 1.0 / std::sqrt(2.0 * gsum);
      if (opt.record_steps) res.step_sizes.push_back(eta);
      total = SymMatrix(d);
      for (int j = 0; j < m; ++j) {
        shares[j] += eta * yy[j];
        shares[j].add_outer(x, -eta * p);
        shares[j] = psd_project(shares[j]);
        total += shares[j];
      }
      avg += total;
    }
  }
  res.cert.degenerate = !(gsum > 0.0);
  avg *= 1.0 / opt.iters;
  finish(res, avg, dirs, c, source, rng, opt);
  return res;
}

DesignResult optimize_design_subgrad(const std::vector<Vec>& dirs, double c, StreamSource& source,
                                     Rng& rng, const SgaOptions& opt) {
  check_args(dirs, c, opt);
  const int d = static_cast<int>(dirs[0].size());
  const double c2 = c * c;
  SymMatrix lam(d), avg(d);
  AssignmentWarm warm;
  DesignResult res;
  double gsum = 0.0;
  for (long k = 0; k < opt.iters; ++k) {
    const Vec& x = source.point(source.next(rng));
    const double p = selection_prob_q(lam.quad(x) - 1.0, opt.mu_b);
    SymMatrix g = f_dual_value(lam, dirs, &warm).gamma;
    g *= 1.0 / c2;
    g.add_outer(x, -p);
    gsum += g.mat().squaredNorm();
    if (gsum > 0.0) {
      const double eta = 1.0 / std::sqrt(2.0 * gsum);
      if (opt.record_steps) res.step_sizes.push_back(eta);
      lam += eta * g;
      lam = psd_project(lam);
    }
    avg += lam;
  }
  res.cert.degenerate = !(gsum > 0.0);
  avg *= 1.0 / opt.iters;
  finish(res, avg, dirs, c, source, rng, opt);
  return res;
}

}  // namespace selsamp
