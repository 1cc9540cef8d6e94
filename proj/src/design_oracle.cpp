// Exact finite-support designs: the P-program and its λ reparameterization.
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "selsamp/design.hpp"
#include "selsamp/errors.hpp"

namespace selsamp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> caps_for(const DesignProblem& prob, double cap) {
  std::vector<double> u(prob.nu.size());
  for (size_t i = 0; i < u.size(); ++i) u[i] = prob.nu[i] > 0.0 ? (cap > 0.0 ? std::min(1.0, cap * prob.nu[i]) : 1.0) : 0.0;
  return u;
}

// KL projection of positive p onto {λ ≤ u, Σλ = 1}: λ_i = min(u_i, s p_i).
std::vector<double> kl_project(const std::vector<double>& p, const std::vector<double>& u) {
  const size_t n = p.size();
  std::vector<size_t> order;
  for (size_t i = 0; i < n; ++i)
    if (u[i] > 0.0 && p[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return u[a] * p[b] < u[b] * p[a]; });
  double free_p = 0.0;
  for (size_t i : order) free_p += p[i];
  double capped = 0.0;
  size_t k = 0;
  double s = 0.0;
  while (k < order.size()) {
    s = (1.0 - capped) / free_p;
    size_t i = order[k];
    if (s * p[i] < u[i]) break;
    capped += u[i];
    free_p -= p[i];
    ++k;
  }
  std::vector<double> lam(n, 0.0);
  for (size_t j = 0; j < order.size(); ++j) {
    size_t i = order[j];
    lam[i] = j < k ? u[i] : s * p[i];
  }
  return lam;
}

// Euclidean projection onto {0 ≤ λ ≤ u, Σλ = 1}.
std::vector<double> euclid_project(const std::vector<double>& v, const std::vector<double>& u) {
  const size_t n = v.size();
  auto mass = [&](double t) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += std::clamp(v[i] - t, 0.0, u[i]);
    return s;
  };
  double lo = *std::min_element(v.begin(), v.end()) - 1.0, hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> lam(n);
  double t = 0.5 * (lo + hi), s = 0.0;
  for (size_t i = 0; i < n; ++i) s += lam[i] = std::clamp(v[i] - t, 0.0, u[i]);
  // absorb the bisection residue into an unsaturated coordinate
  for (size_t i = 0; i < n && s != 1.0; ++i) {
    double nv = std::clamp(lam[i] + (1.0 - s), 0.0, u[i]);
    s += nv - lam[i];
    lam[i] = nv;
  }
  return lam;
}

std::vector<double> simplex_project(const std::vector<double>& v) {
  return euclid_project(v, std::vector<double>(v.size(), 1.0));
}

struct Oracle {
  const DesignProblem& prob;
  double scale;  // ρ at the start point, keeps the saddle O(1)

  // g_z/scale and ∂/∂λ of Σ w_z g_z/scale. Returns false when A(λ) is singular.
  bool eval(const std::vector<double>& lam, const std::vector<double>& w, std::vector<double>& g,
            std::vector<double>& grad) const {
    const int d = static_cast<int>(prob.points[0].size());
    Mat a = Mat::Zero(d, d);
    for (size_t i = 0; i < lam.size(); ++i)
      if (lam[i] > 0.0) a.noalias() += lam[i] * prob.points[i] * prob.points[i].transpose();
    Eigen::LDLT<Mat> f(a);
    if (f.info() != Eigen::Success || !(f.vectorD().minCoeff() > 1e-13 * (1.0 + a.norm()))) return false;
    const size_t nz = prob.dirs.size();
    g.assign(nz, 0.0);
    grad.assign(lam.size(), 0.0);
    for (size_t z = 0; z < nz; ++z) {
      Vec az = f.solve(prob.dirs[z]);
      g[z] = prob.dirs[z].dot(az) / prob.denom[z] / scale;
      if (!std::isfinite(g[z])) return false;
      const double wz = w[z] / prob.denom[z] / scale;
      for (size_t i = 0; i < lam.size(); ++i) {
        double t = prob.points[i].dot(az);
        grad[i] -= wz * t * t;
      }
    }
    return true;
  }
};

double kl_div(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) s += a[i] * std::log(a[i] / b[i]) - a[i] + b[i];
    else s += b[i];
  }
  return s;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return 0.5 * s;
}

double linf_ratio(const std::vector<double>& lam, const std::vector<double>& nu) {
  double r = 0.0;
  for (size_t i = 0; i < lam.size(); ++i) {
    if (lam[i] <= 0.0) continue;
    r = std::max(r, nu[i] > 0.0 ? lam[i] / nu[i] : kInf);
  }
  return r;
}

// min ⟨c, λ⟩ over {0 ≤ λ ≤ u, Σλ = 1}: fill the cheapest coordinates first.
double linear_min_capped(const std::vector<double>& c, const std::vector<double>& u) {
  std::vector<size_t> order(c.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return c[a] < c[b]; });
  double left = 1.0, v = 0.0;
  for (size_t i : order) {
    if (left <= 0.0) break;
    const double t = std::min(left, u[i]);
    v += t * c[i];
    left -= t;
  }
  return v;
}

double safe_rho(const DesignProblem& prob, const std::vector<double>& lam) {
  try {
    return rho(prob, lam);
  } catch (const SingularMatrix&) {
    return kInf;
  }
}

}  // namespace

ReparamSolution min_rho_capped(const DesignProblem& prob, double cap, bool entropic, int iters,
                               const DesignWeights* init, double gap_tol) {
  const size_t n = prob.nu.size();
  const size_t nz = prob.dirs.size();
  ReparamSolution best;
  best.lambda = prob.nu;
  if (nz == 0) {
    best.value = 0.0;
    best.cap = 1.0;
    return best;
  }
  const std::vector<double> u = caps_for(prob, cap);
  std::vector<double> lam = init ? *init : prob.nu;
  if (entropic) {
    // keep every admissible coordinate strictly positive
    for (size_t i = 0; i < n; ++i) lam[i] = u[i] > 0.0 ? std::max(lam[i], 1e-12 * u[i]) : 0.0;
    lam = kl_project(lam, u);
  } else {
    lam = euclid_project(lam, u);
  }
  best.lambda = lam;
  best.value = safe_rho(prob, lam);
  if (!std::isfinite(best.value)) {
    best.lambda = prob.nu;
    best.value = safe_rho(prob, prob.nu);
    lam = prob.nu;
    if (entropic) lam = kl_project(lam, u);
  }
  best.cap = linf_ratio(best.lambda, prob.nu);

  Oracle orc{prob, std::max(best.value, 1e-300)};
  std::vector<double> w(nz, 1.0 / nz);
  std::vector<double> g, gl, g2, gl2;
  if (!orc.eval(lam, w, g, gl)) return best;

  std::vector<double> avg_l(n, 0.0), avg_w(nz, 0.0);
  double wsum = 0.0;
  // For fixed w, Σ w_z g_z is convex in λ; its linearization gives a lower bound on the saddle value.
  auto lower_bound = [&](const std::vector<double>& wv) {
    std::vector<double> gz, gr;
    if (!orc.eval(lam, wv, gz, gr)) return -kInf;
    double v = 0.0, at = 0.0;
    for (size_t z = 0; z < nz; ++z) v += wv[z] * gz[z];
    for (size_t i = 0; i < n; ++i) at += gr[i] * lam[i];
    return orc.scale * (v + linear_min_capped(gr, u) - at);
  };
  double gamma = entropic ? 1.0 : 1.0 / n;

  auto step = [&](const std::vector<double>& l0, const std::vector<double>& w0, const std::vector<double>& gz,
                  const std::vector<double>& glam, std::vector<double>& l1, std::vector<double>& w1) {
    if (entropic) {
      std::vector<double> e(n);
      double mx = -kInf;
      for (size_t i = 0; i < n; ++i)
        if (l0[i] > 0.0) mx = std::max(mx, -gamma * glam[i]);
      for (size_t i = 0; i < n; ++i) e[i] = l0[i] > 0.0 ? l0[i] * std::exp(-gamma * glam[i] - mx) : 0.0;
      l1 = kl_project(e, u);
      for (size_t i = 0; i < n; ++i)
        if (u[i] > 0.0) l1[i] = std::max(l1[i], 1e-300);
      double m2 = -kInf;
      for (size_t z = 0; z < nz; ++z) m2 = std::max(m2, gamma * gz[z]);
      w1.resize(nz);
      double s = 0.0;
      for (size_t z = 0; z < nz; ++z) s += w1[z] = std::max(w0[z], 1e-300) * std::exp(gamma * gz[z] - m2);
      for (auto& v : w1) v /= s;
    } else {
      std::vector<double> v(n);
      for (size_t i = 0; i < n; ++i) v[i] = l0[i] - gamma * glam[i];
      l1 = euclid_project(v, u);
      std::vector<double> vw(nz);
      for (size_t z = 0; z < nz; ++z) vw[z] = w0[z] + gamma * gz[z];
      w1 = simplex_project(vw);
    }
  };
  auto div = [&](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& wa,
                 const std::vector<double>& wb) {
    return entropic ? kl_div(a, b) + kl_div(wa, wb) : sq_dist(a, b) + sq_dist(wa, wb);
  };

  std::vector<double> lh, wh, ln, wn;
  for (int it = 0; it < iters; ++it) {
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      step(lam, w, g, gl, lh, wh);
      if (!orc.eval(lh, wh, g2, gl2)) {
        gamma *= 0.5;
        continue;
      }
      step(lam, w, g2, gl2, ln, wn);
      // ⟨F(u') − F(u), u' − u⁺⟩ with F = (∇_λ, −∇_w)
      double inner_prod = 0.0;
      for (size_t i = 0; i < n; ++i) inner_prod += (gl2[i] - gl[i]) * (lh[i] - ln[i]);
      for (size_t z = 0; z < nz; ++z) inner_prod -= (g2[z] - g[z]) * (wh[z] - wn[z]);
      if (gamma * inner_prod <= div(ln, lh, wn, wh) + div(lh, lam, wh, w) + 1e-15) {
        accepted = true;
      } else {
        gamma *= 0.5;
      }
    }
    if (!accepted) break;
    for (size_t i = 0; i < n; ++i) avg_l[i] += gamma * lh[i];
    for (size_t z = 0; z < nz; ++z) avg_w[z] += gamma * wh[z];
    wsum += gamma;
    lam = ln;
    w = wn;
    gamma *= 1.25;
    if (!orc.eval(lam, w, g, gl)) break;
    if (it % 50 == 49 || it + 1 == iters) {
      std::vector<double> a(n);
      for (size_t i = 0; i < n; ++i) a[i] = avg_l[i] / wsum;
      for (const auto* cand : {&a, &lam}) {
        double r = safe_rho(prob, *cand);
        if (r < best.value) {
          best.value = r;
          best.lambda = *cand;
        }
      }
      std::vector<double> aw(nz);
      for (size_t z = 0; z < nz; ++z) aw[z] = avg_w[z] / wsum;
      const double lb = std::max(lower_bound(w), lower_bound(aw));
      if (best.value - lb <= gap_tol * best.value) break;
    }
  }
  best.cap = linf_ratio(best.lambda, prob.nu);
  return best;
}

namespace {

void check_program(const DesignProblem& prob, double tau, double beta) {
  if (prob.points.empty() || prob.points.size() != prob.nu.size()) throw InvalidInput("design program: bad support");
  if (!(tau > 0.0) || !(beta > 0.0)) throw InvalidInput("design program: tau and beta must be positive");
}

}  // namespace

OracleDesign oracle_design(const DesignProblem& prob, double tau, double beta) {
  check_program(prob, tau, beta);
  const size_t n = prob.nu.size();
  OracleDesign out;
  if (prob.dirs.empty()) {
    out.p.assign(n, 0.0);
    out.lambda = prob.nu;
    return out;
  }
  const double T = tau / beta;
  const double rnu = safe_rho(prob, prob.nu);
  if (!(T >= rnu * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "oracle design infeasible: tau = " << tau << " < rho(nu)*beta = " << rnu * beta;
    throw Infeasible(os.str(), rnu * beta);
  }
  ReparamSolution best{prob.nu, rnu, 1.0};
  ReparamSolution unc = min_rho_capped(prob, 0.0, true);
  if (unc.cap * unc.value <= T) {
    best = unc;
  } else {
    double lo = 1.0, hi = std::max(1.0, T / unc.value);
    DesignWeights warm = prob.nu;
    for (int it = 0; it < 40; ++it) {
      const double k = 0.5 * (lo + hi);
      ReparamSolution s = min_rho_capped(prob, k, true, 10000, &warm);
      if (s.cap * s.value <= T) {
        lo = k;
        warm = s.lambda;
        if (s.value < best.value) best = s;
      } else {
        hi = k;
      }
    }
  }
  out.lambda = best.lambda;
  out.cap = best.cap;
  out.p.assign(n, 0.0);
  double cost = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (prob.nu[i] <= 0.0) continue;
    out.p[i] = std::min(1.0, best.value * best.lambda[i] / (T * prob.nu[i]));
    cost += prob.nu[i] * out.p[i];
  }
  out.cost = tau * cost;
  // constraint value at P*: max_z ‖z − z*‖²_{(τΣ_P)⁻¹} β / denom
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i) w[i] = tau * prob.nu[i] * out.p[i] / beta;
  double con = 0.0;
  try {
    SymMatrix s = design_matrix(prob.points, w);
    for (size_t z = 0; z < prob.dirs.size(); ++z) con = std::max(con, quad_form_inv(s, prob.dirs[z]) / prob.denom[z]);
  } catch (const SingularMatrix&) {
    con = kInf;
  }
  out.residual = con - 1.0;
  return out;
}

OracleDesign oracle_design(const Instance& inst, double eps, double tau, double beta) {
  return oracle_design(make_design_problem(inst, eps), tau, beta);
}

ReparamSolution reparam_program(const DesignProblem& prob, double tau, double beta) {
  check_program(prob, tau, beta);
  if (prob.dirs.empty()) return {prob.nu, 0.0, 1.0};
  const double T = tau / beta;
  const double rnu = safe_rho(prob, prob.nu);
  if (!(T >= rnu * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "reparameterized program infeasible: tau = " << tau << " < rho(nu)*beta = " << rnu * beta;
    throw Infeasible(os.str(), rnu * beta);
  }
  ReparamSolution best{prob.nu, rnu, 1.0};
  ReparamSolution unc = min_rho_capped(prob, 0.0, false);
  if (unc.cap * unc.value <= T) {
    best = unc;
  } else {
    // Smallest value m with min_{λ ≤ (T/m)ν} ρ(λ) ≤ m; the predicate is monotone in m.
    double lo = unc.value, hi = rnu;
    DesignWeights warm = prob.nu;
    for (int it = 0; it < 40 && hi - lo > 1e-9 * hi; ++it) {
      const double m = 0.5 * (lo + hi);
      ReparamSolution s = min_rho_capped(prob, T / m, false, 10000, &warm);
      if (s.value <= m && s.cap * s.value <= T) {
        hi = m;
        warm = s.lambda;
        if (s.value < best.value) best = s;
      } else {
        lo = m;
      }
    }
  }
  best.value *= beta;
  return best;
}

ReparamSolution reparam_program(const Instance& inst, double tau, double beta, double eps) {
  return reparam_program(make_design_problem(inst, eps), tau, beta);
}

}  // namespace selsamp
