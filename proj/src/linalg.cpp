#include "selsamp/linalg.hpp"

#include <cmath>
#include <sstream>

#include "selsamp/errors.hpp"

namespace selsamp {

SymMatrix::SymMatrix(int dim) : m_(Mat::Zero(dim, dim)) {
  if (dim < 1) throw InvalidInput("SymMatrix: dim must be >= 1");
}

SymMatrix::SymMatrix(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw InvalidInput("SymMatrix: need a non-empty square matrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix s(dim);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::outer(const Vec& v) {
  SymMatrix s(static_cast<int>(v.size()));
  s.add_outer(v, 1.0);
  return s;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) { m_ += o.m_; return *this; }
SymMatrix& SymMatrix::operator-=(const SymMatrix& o) { m_ -= o.m_; return *this; }
SymMatrix& SymMatrix::operator*=(double s) { m_ *= s; return *this; }

void SymMatrix::add_outer(const Vec& v, double w) {
  const int d = dim();
  for (int j = 0; j < d; ++j) {
    for (int i = j; i < d; ++i) {
      double e = w * v(i) * v(j);
      m_(i, j) += e;
      if (i != j) m_(j, i) += e;
    }
  }
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

double inner(const SymMatrix& a, const SymMatrix& b) {
  return (a.mat().array() * b.mat().array()).sum();
}

Eig eig_sym(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es;
  if (m.dim() == 2) {
    es.computeDirect(m.mat());
  } else {
    es.compute(m.mat());
  }
  if (es.info() != Eigen::Success) throw InternalConsistency("eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

double tol_eig(const SymMatrix& m) {
  // Frobenius norm bounds the spectral radius and is cheap.
  return 1e-10 * (1.0 + m.frobenius());
}

double default_ridge(const SymMatrix& a) { return 1e-12 * a.trace() / a.dim(); }

static void require_finite(const SymMatrix& m, const char* who) {
  if (!m.all_finite()) throw InvalidInput(std::string(who) + ": non-finite entries");
}

SymMatrix psd_project(const SymMatrix& m) {
  require_finite(m, "psd_project");
  Eig e = eig_sym(m);
  if (e.values(0) >= 0.0) return m;
  Vec clipped = e.values.cwiseMax(0.0);
  return SymMatrix(Mat(e.vectors * clipped.asDiagonal() * e.vectors.transpose()));
}

double min_eigenvalue(const SymMatrix& m) { return eig_sym(m).values(0); }

namespace {

Eigen::LDLT<Mat> factor(const SymMatrix& a, double ridge, const char* who) {
  require_finite(a, who);
  if (ridge < 0.0) throw InvalidInput(std::string(who) + ": negative ridge");
  Mat m = a.mat();
  m.diagonal().array() += ridge;
  Eigen::LDLT<Mat> ldlt(m);
  const double tol = 1e-10 * (1.0 + m.norm());
  const double piv = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || !(piv > tol)) {
    std::ostringstream os;
    os << who << ": matrix is numerically singular (smallest pivot " << piv
       << ", scale " << m.norm() << ")";
    throw SingularMatrix(os.str());
  }
  return ldlt;
}

}  // namespace

double quad_form_inv(const SymMatrix& a, const Vec& v, double ridge) {
  auto ldlt = factor(a, ridge, "quad_form_inv");
  double q = v.dot(ldlt.solve(v));
  return std::max(q, 0.0);
}

Vec solve_sym(const SymMatrix& a, const Vec& b, double ridge) {
  return factor(a, ridge, "solve_sym").solve(b);
}

bool schur_feasible(const SymMatrix& a, const Vec& y, double c) {
  if (!(c > 0.0)) throw InvalidInput("schur_feasible: c must be positive");
  SymMatrix s = a;
  s.add_outer(y, -1.0 / (c * c));
  return min_eigenvalue(s) >= -tol_eig(s);
}

SymMatrix weighted_second_moment(const std::vector<Vec>& points,
                                 const std::vector<double>& weights) {
  if (points.empty()) throw InvalidInput("weighted_second_moment: empty input");
  if (points.size() != weights.size()) throw InvalidInput("weighted_second_moment: length mismatch");
  SymMatrix s(static_cast<int>(points[0].size()));
  for (size_t i = 0; i < points.size(); ++i) {
    if (weights[i] < 0.0) throw InvalidInput("weighted_second_moment: negative weight");
    if (weights[i] > 0.0) s.add_outer(points[i], weights[i]);
  }
  return s;
}

SymMatrix sqrt_psd(const SymMatrix& a) {
  Eig e = eig_sym(a);
  Vec r = e.values.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(Mat(e.vectors * r.asDiagonal() * e.vectors.transpose()));
}

SymMatrix inv_sqrt_pd(const SymMatrix& a) {
  Eig e = eig_sym(a);
  if (!(e.values(0) > tol_eig(a))) throw SingularMatrix("inv_sqrt_pd: matrix not positive definite");
  Vec r = e.values.cwiseSqrt().cwiseInverse();
  return SymMatrix(Mat(e.vectors * r.asDiagonal() * e.vectors.transpose()));
}

}  // namespace selsamp
