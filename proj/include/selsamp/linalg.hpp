#pragma once

#include <Eigen/Dense>
#include <vector>

namespace selsamp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dense symmetric matrix. Every constructor symmetrizes, so (i,j) and (j,i)
// always hold the same double.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);
  explicit SymMatrix(const Mat& m);

  static SymMatrix zero(int dim) { return SymMatrix(dim); }
  static SymMatrix identity(int dim);
  static SymMatrix outer(const Vec& v);  // v vᵀ

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  // this += w · v vᵀ
  void add_outer(const Vec& v, double w);

  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }
  double quad(const Vec& v) const { return v.dot(m_ * v); }
  bool all_finite() const { return m_.allFinite(); }

 private:
  Mat m_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
// Trace inner product ⟨A, B⟩.
double inner(const SymMatrix& a, const SymMatrix& b);

struct Eig {
  Vec values;  // ascending
  Mat vectors;
};
Eig eig_sym(const SymMatrix& m);

// 1e-10 · (1 + spectral scale).
double tol_eig(const SymMatrix& m);
double default_ridge(const SymMatrix& a);

SymMatrix psd_project(const SymMatrix& m);
double min_eigenvalue(const SymMatrix& m);

// vᵀ (A + ridge·I)⁻¹ v through an LDLᵀ solve.
double quad_form_inv(const SymMatrix& a, const Vec& v, double ridge = 0.0);
// Solve (A + ridge·I) x = b.
Vec solve_sym(const SymMatrix& a, const Vec& b, double ridge = 0.0);

// A ⪰ y yᵀ / c².
bool schur_feasible(const SymMatrix& a, const Vec& y, double c);

SymMatrix weighted_second_moment(const std::vector<Vec>& points,
                                 const std::vector<double>& weights);

// A^{1/2} and A^{-1/2} for PSD A (the latter on the range only).
SymMatrix sqrt_psd(const SymMatrix& a);
SymMatrix inv_sqrt_pd(const SymMatrix& a);

}  // namespace selsamp
