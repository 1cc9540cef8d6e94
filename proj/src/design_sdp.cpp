// Assignment SDP  max Σ yᵀΛ_y y  s.t. Σ Λ_y = Λ, Λ_y ⪰ 0  and its dual
// min ⟨Γ, Λ⟩  s.t. Γ ⪰ yyᵀ (and Γ ⪯ 2Σyyᵀ).
#include <algorithm>
#include <cmath>
#include <sstream>

#include "selsamp/design.hpp"
#include "selsamp/errors.hpp"

namespace selsamp {

double sdp_gap_tol(double objective) { return 1e-6 * (1.0 + std::abs(objective)); }

namespace {

SymMatrix sum_outer(const std::vector<Vec>& dirs) {
  SymMatrix s(static_cast<int>(dirs[0].size()));
  for (const auto& y : dirs) s.add_outer(y, 1.0);
  return s;
}

// Smallest t ≥ 0 with Γ + tI ⪰ yyᵀ for all y.
double lower_shift(const SymMatrix& gamma, const std::vector<SymMatrix>& cy) {
  double t = 0.0;
  for (const auto& c : cy) t = std::max(t, -min_eigenvalue(gamma - c));
  return t;
}

}  // namespace

namespace {

// Consensus ADMM for  max Σ⟨C_k, X_k⟩  s.t. Σ X_k = L, X_k ⪰ 0. Inputs are pre-scaled;
// ρU converges to the dual Γ.
struct Admm {
  std::vector<SymMatrix> x;
  SymMatrix gamma;
  double primal = 0.0, dual = 0.0, gap = 0.0, res = 0.0;
  int iters = 0;
  bool done = false;
};

Admm admm_consensus(const SymMatrix& L, const std::vector<SymMatrix>& C, AssignmentWarm* warm, int max_iters) {
  const int d = L.dim();
  const int m = static_cast<int>(C.size());
  Admm a;
  std::vector<SymMatrix>& X = a.x;
  std::vector<SymMatrix> Y;
  SymMatrix U(d);
  double rho = 1.0;
  if (warm && warm->valid && static_cast<int>(warm->x.size()) == m && warm->u.dim() == d) {
    X = warm->x;
    U = warm->u;
    rho = warm->rho;
  } else {
    X.assign(m, (1.0 / m) * L);
  }
  {
    SymMatrix E = -1.0 * L;
    for (const auto& x : X) E += x;
    for (const auto& x : X) Y.push_back(x - (1.0 / m) * E);
  }
  int it = 0;
  for (; it < max_iters; ++it) {
    for (int k = 0; k < m; ++k) {
      SymMatrix v = Y[k] - U;
      v += (1.0 / rho) * C[k];
      X[k] = psd_project(v);
    }
    SymMatrix E = -1.0 * L;
    for (const auto& x : X) E += x;
    E *= 1.0 / m;
    double dres = 0.0;
    for (int k = 0; k < m; ++k) {
      SymMatrix yn = X[k] - E;
      dres += (yn - Y[k]).mat().squaredNorm();
      Y[k] = yn;
    }
    U += E;

    if (it % 10 == 9 || it + 1 == max_iters) {
      a.res = m * E.frobenius();
      dres = rho * std::sqrt(dres);
      a.gamma = rho * U;
      a.gamma += lower_shift(a.gamma, C) * SymMatrix::identity(d);
      a.primal = 0.0;
      for (int k = 0; k < m; ++k) a.primal += inner(C[k], X[k]);
      a.dual = inner(a.gamma, L);
      a.gap = a.dual - a.primal;
      // Relative criterion keeps the iteration count invariant under rescaling of the inputs.
      if (a.res <= 1e-9 && std::abs(a.gap) <= 0.5e-6 * std::abs(a.primal)) {
        a.done = true;
        break;
      }
      if (a.res > 10.0 * dres) {
        rho *= 2.0;
        U *= 0.5;
      } else if (dres > 10.0 * a.res) {
        rho *= 0.5;
        U *= 2.0;
      }
    }
  }
  a.iters = it + 1;
  if (warm) {
    warm->x = X;
    warm->u = U;
    warm->rho = rho;
    warm->valid = true;
  }
  return a;
}

}  // namespace

AssignmentSolution solve_assignment(const SymMatrix& lam, const std::vector<Vec>& dirs,
                                    AssignmentWarm* warm, int max_iters) {
  if (dirs.empty()) throw InvalidInput("assignment: empty direction set");
  const int d = lam.dim();
  const int m = static_cast<int>(dirs.size());
  for (const auto& y : dirs)
    if (y.size() != d) throw InvalidInput("assignment: direction dimension mismatch");
  if (!lam.all_finite()) throw InvalidInput("assignment: non-finite matrix");

  AssignmentSolution out;
  const double scale_l = lam.frobenius();
  if (scale_l == 0.0) {
    out.shares.assign(m, SymMatrix(d));
    out.gamma = sum_outer(dirs);
    return out;
  }
  if (m == 1) {
    out.shares = {lam};
    out.primal = lam.quad(dirs[0]);
    out.gamma = SymMatrix::outer(dirs[0]);
    out.dual = out.primal;
    return out;
  }

  // Whiten on the range of L = Λ/‖Λ‖_F = V Vᵀ: shares X_y = V W_y Vᵀ with Σ W_y = I,
  // which stays well conditioned when Λ is nearly singular. Eigen-directions below
  // 1e-12 of the top one are dropped and their mass goes to the first share.
  const SymMatrix L = (1.0 / scale_l) * lam;
  const Eig e = eig_sym(L);
  const double top = e.values(d - 1);
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (e.values(i) > 1e-12 * top) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  Mat V(d, r), Vinv(d, r);
  for (int j = 0; j < r; ++j) {
    const double sv = std::sqrt(e.values(keep[j]));
    V.col(j) = sv * e.vectors.col(keep[j]);
    Vinv.col(j) = e.vectors.col(keep[j]) / sv;
  }
  std::vector<Vec> a;
  double scale = 0.0;
  for (const auto& y : dirs) {
    a.push_back(V.transpose() * y);
    scale = std::max(scale, a.back().squaredNorm());
  }
  if (scale == 0.0) {
    // Λ annihilates every direction: any split is optimal.
    out.shares.assign(m, (1.0 / m) * lam);
    out.gamma = sum_outer(dirs);
    out.dual = inner(out.gamma, lam);
    return out;
  }
  std::vector<SymMatrix> C;
  for (const auto& v : a) C.push_back((1.0 / scale) * SymMatrix::outer(v));
  Admm adm = admm_consensus(SymMatrix::identity(r), C, warm, max_iters);
  if (!adm.done) {
    std::ostringstream os;
    os << "assignment SDP did not converge in " << max_iters << " iterations (gap " << adm.gap * scale
       << ", coupling residual " << adm.res << ")";
    throw SolverFailure(os.str(), adm.gap * scale);
  }
  out.iters = adm.iters;
  SymMatrix total(d);
  for (const auto& w : adm.x) {
    out.shares.push_back(SymMatrix(Mat(V * w.mat() * V.transpose())));
    total += out.shares.back();
  }
  out.shares[0] += L - total;
  out.shares[0] = psd_project(out.shares[0]);
  double primal = 0.0;
  for (int k = 0; k < m; ++k) primal += out.shares[k].quad(dirs[k]);
  SymMatrix sum_check = -1.0 * L;
  for (const auto& x : out.shares) sum_check += x;
  out.residual = scale_l * sum_check.frobenius();
  for (auto& x : out.shares) x *= scale_l;
  out.primal = scale_l * primal;

  // Reduced dual value tr(G) certifies the primal. The full-space Γ is V⁺ᵀ G V⁺ on
  // the range plus t·(null projector), then the smallest isotropic shift restoring
  // Γ ⪰ yyᵀ; t is picked from a geometric ladder to minimize ⟨Γ, Λ⟩.
  out.dual = scale_l * scale * adm.dual;
  const Mat g_range = Vinv * (scale * adm.gamma.mat()) * Vinv.transpose();
  std::vector<SymMatrix> cy;
  for (const auto& y : dirs) cy.push_back(SymMatrix::outer(y));
  auto complete = [&](double t) {
    SymMatrix g(g_range);
    if (r < d) {
      const Mat basis = e.vectors(Eigen::all, keep);
      g += SymMatrix(Mat(t * (Mat::Identity(d, d) - basis * basis.transpose())));
    }
    g += lower_shift(g, cy) * SymMatrix::identity(d);
    return g;
  };
  out.gamma = complete(0.0);
  if (r < d) {
    const double t0 = sum_outer(dirs).trace();
    double best = inner(out.gamma, L);
    for (double t = t0; t <= 1e8 * t0; t *= 4.0) {
      SymMatrix g = complete(t);
      const double v = inner(g, L);
      if (v < best) {
        best = v;
        out.gamma = g;
      }
    }
  }
  return out;
}

std::vector<SymMatrix> assign_dual_shares(const SymMatrix& lam, const std::vector<Vec>& dirs) {
  return solve_assignment(lam, dirs).shares;
}

FDual f_dual_value(const SymMatrix& lam, const std::vector<Vec>& dirs, AssignmentWarm* warm) {
  if (dirs.empty()) throw InvalidInput("f_dual_value: empty direction set");
  if (!lam.all_finite()) throw InvalidInput("f_dual_value: non-finite matrix");
  if (lam.frobenius() == 0.0) return {0.0, sum_outer(dirs)};
  if (dirs.size() == 1) return {lam.quad(dirs[0]), SymMatrix::outer(dirs[0])};
  const AssignmentSolution sol = solve_assignment(lam, dirs, warm);
  return {sol.primal, sol.gamma};
}

}  // namespace selsamp
