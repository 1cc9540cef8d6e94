#include <cmath>
#include <random>

#include "doctest.h"
#include "selsamp/errors.hpp"
#include "selsamp/instance.hpp"
#include "selsamp/linalg.hpp"

using namespace selsamp;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SymMatrix diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return SymMatrix(m);
}

bool near(const SymMatrix& a, const SymMatrix& b, double tol) { return (a - b).frobenius() <= tol; }

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("storage is exactly symmetric") {
  Mat m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const SymMatrix s(m);
  CHECK(s(0, 1) == s(1, 0));
  CHECK_THROWS_AS(psd_project(SymMatrix(Mat::Constant(2, 2, NAN))), InvalidInput);
}

TEST_CASE("psd_project examples") {
  CHECK(near(psd_project(SymMatrix::identity(3)), SymMatrix::identity(3), 1e-15));
  CHECK(near(psd_project(diag2(1.0, -1.0)), diag2(1.0, 0.0), 1e-15));

  // Against the explicit formula M − Σ_{λ<0} λ v vᵀ.
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    Mat b(4, 4);
    for (int i = 0; i < 16; ++i) b(i / 4, i % 4) = n(g);
    const SymMatrix m(Mat(b + b.transpose()));
    Eigen::SelfAdjointEigenSolver<Mat> es(m.mat());
    Mat expect = m.mat();
    for (int i = 0; i < 4; ++i)
      if (es.eigenvalues()(i) < 0) expect -= es.eigenvalues()(i) * es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
    CHECK(near(psd_project(m), SymMatrix(expect), 1e-12 * m.frobenius()));
    // PSD input is returned unchanged.
    const SymMatrix p(Mat(b * b.transpose()));
    CHECK(near(psd_project(p), p, tol_eig(p)));
  }
}

TEST_CASE("quad_form_inv examples") {
  CHECK(quad_form_inv(SymMatrix::identity(2), v2(1, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(quad_form_inv(diag2(0.5, 0.5), v2(1, -1)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(quad_form_inv(diag2(1.0, 0.0), v2(0, 1)), SingularMatrix);
  CHECK(quad_form_inv(diag2(1.0, 0.0), v2(0, 1), 0.5) == doctest::Approx(2.0));
}

TEST_CASE("quad_form_inv is antitone in the Loewner order") {
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    Mat a(3, 3), c(3, 3);
    for (int i = 0; i < 9; ++i) {
      a(i / 3, i % 3) = n(g);
      c(i / 3, i % 3) = n(g);
    }
    const SymMatrix A(Mat(a * a.transpose() + 0.1 * Mat::Identity(3, 3)));
    const SymMatrix B = A + SymMatrix(Mat(c * c.transpose()));
    Vec v(3);
    for (int i = 0; i < 3; ++i) v(i) = n(g);
    CHECK(quad_form_inv(A, v) >= quad_form_inv(B, v) * (1 - 1e-12));
  }
}

TEST_CASE("schur_feasible examples") {
  CHECK(schur_feasible(SymMatrix::identity(2), v2(1, 0), 1.0));
  CHECK_FALSE(schur_feasible(SymMatrix::identity(2), v2(1, 0), 0.9));
}

TEST_CASE("weighted_second_moment examples") {
  CHECK(near(weighted_second_moment({v2(1, 0), v2(0, 1)}, {0.5, 0.5}), diag2(0.5, 0.5), 0.0));
  const Vec x = v2(0.3, -2.0);
  CHECK(near(weighted_second_moment({x}, {1.0}), SymMatrix::outer(x), 0.0));
  const Instance b = benchmark_instance();
  CHECK(weighted_second_moment(b.stream_points, b.stream_probs).trace() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(weighted_second_moment({}, {}), InvalidInput);
}

}
