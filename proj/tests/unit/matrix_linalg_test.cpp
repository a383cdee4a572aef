#include <cmath>
#include <vector>

#include "doctest.h"
#include "fdapower/errors.hpp"
#include "fdapower/linalg.hpp"
#include "fdapower/matrix.hpp"
#include "fdapower/rng.hpp"

using namespace fdapower;

namespace {

Matrix make(std::size_t n, std::initializer_list<double> vals) {
  Matrix m(n, n);
  auto it = vals.begin();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = *it++;
  return m;
}

Matrix random_spd(RngStream& rng, std::size_t n, double ridge) {
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.normal();
  Matrix a = b * b.transpose();
  for (std::size_t i = 0; i < n; ++i) a(i, i) += ridge;
  return a;
}

}  // namespace

TEST_CASE("matrix basics: identity, transpose, product, column") {
  const Matrix id = Matrix::identity(3);
  CHECK(id(0, 0) == 1.0);
  CHECK(id(0, 1) == 0.0);

  Matrix a(2, 3);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(0, 2) = 3;
  a(1, 0) = 4;
  a(1, 1) = 5;
  a(1, 2) = 6;
  const Matrix at = a.transpose();
  CHECK(at.rows() == 3);
  CHECK(at(2, 1) == 6.0);

  const Matrix aat = a * at;  // [[14, 32], [32, 77]]
  CHECK(aat(0, 0) == doctest::Approx(14.0));
  CHECK(aat(0, 1) == doctest::Approx(32.0));
  CHECK(aat(1, 1) == doctest::Approx(77.0));

  const std::vector<double> v = a.multiply({1.0, 1.0, 1.0});
  CHECK(v[0] == doctest::Approx(6.0));
  CHECK(v[1] == doctest::Approx(15.0));

  const std::vector<double> col = at.column(1);
  CHECK(col.size() == 3);
  CHECK(col[0] == 4.0);
  CHECK(col[2] == 6.0);

  CHECK(a.max_abs() == 6.0);
  CHECK(a.frobenius_norm() == doctest::Approx(std::sqrt(91.0)));
  CHECK(a.is_finite());
}

TEST_CASE("matrix add, subtract, scale, symmetry helpers") {
  const Matrix a = make(2, {1, 2, 3, 4});
  const Matrix b = make(2, {4, 3, 2, 1});
  const Matrix sum = a + b;
  const Matrix diff = a - b;
  CHECK(sum(0, 0) == 5.0);
  CHECK(sum(1, 1) == 5.0);
  CHECK(diff(0, 1) == -1.0);
  CHECK(a.scaled(2.0)(1, 0) == 6.0);

  CHECK(a.asymmetry() == doctest::Approx(1.0));
  Matrix c = a;
  c.symmetrize();
  CHECK(c.asymmetry() == 0.0);
  CHECK(c(0, 1) == doctest::Approx(2.5));
  CHECK(c(1, 0) == doctest::Approx(2.5));
}

TEST_CASE("cholesky of a hand example and failure on indefinite input") {
  const Matrix a = make(2, {4, 2, 2, 5});
  const Matrix l = chol_spd(a);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == doctest::Approx(0.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));

  const Matrix back = l * l.transpose();
  CHECK((back - a).max_abs() == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(chol_spd(make(2, {1, 2, 2, 1})), NotSpdError);
}

TEST_CASE("symmetric eigendecomposition of a hand example") {
  const Matrix a = make(2, {2, 1, 1, 2});
  const SymEigen eig = sym_eigen(a);
  REQUIRE(eig.values.size() == 2);
  CHECK(eig.values[0] == doctest::Approx(3.0));
  CHECK(eig.values[1] == doctest::Approx(1.0));

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // Sign convention: largest-magnitude entry of each eigenvector is positive.
  CHECK(eig.vectors(0, 0) == doctest::Approx(inv_sqrt2));
  CHECK(eig.vectors(1, 0) == doctest::Approx(inv_sqrt2));
  CHECK(std::fabs(eig.vectors(0, 1)) == doctest::Approx(inv_sqrt2));
  CHECK(eig.vectors(0, 1) * eig.vectors(1, 1) < 0.0);
}

TEST_CASE("eigendecomposition reconstructs and orthonormalizes random symmetric matrices") {
  RngStream rng(101);
  for (std::size_t n : {3u, 7u, 16u}) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        a(i, j) = rng.normal();
        a(j, i) = a(i, j);
      }
    const SymEigen eig = sym_eigen(a);

    for (std::size_t k = 1; k < n; ++k) CHECK(eig.values[k - 1] >= eig.values[k]);

    const Matrix vtv = eig.vectors.transpose() * eig.vectors;
    CHECK((vtv - Matrix::identity(n)).max_abs() < 1e-10);

    Matrix recon(n, n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          recon(i, j) += eig.values[k] * eig.vectors(i, k) * eig.vectors(j, k);
    CHECK((recon - a).max_abs() < 1e-8);
  }

  CHECK_THROWS_AS(sym_eigen(make(2, {1, 2, 3, 4})), std::invalid_argument);
}

TEST_CASE("spd solves, inverse square root, trace") {
  RngStream rng(202);
  const Matrix a = random_spd(rng, 5, 1.0);

  std::vector<double> x_true(5);
  for (double& v : x_true) v = rng.normal();
  const std::vector<double> b = a.multiply(x_true);
  const std::vector<double> x = spd_solve(a, b);
  for (std::size_t i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(x_true[i]).epsilon(1e-9));

  const Matrix inv = spd_solve(a, Matrix::identity(5));
  CHECK((a * inv - Matrix::identity(5)).max_abs() < 1e-9);

  const Matrix root = inv_sqrt_spd(a);
  CHECK((root * a * root - Matrix::identity(5)).max_abs() < 1e-9);
  CHECK(root.asymmetry() < 1e-10);

  double tr = 0.0;
  for (std::size_t i = 0; i < 5; ++i) tr += a(i, i);
  CHECK(trace(a) == doctest::Approx(tr));

  const Matrix l = chol_spd(a);
  const std::vector<double> x2 = chol_solve(l, b);
  for (std::size_t i = 0; i < 5; ++i) CHECK(x2[i] == doctest::Approx(x_true[i]).epsilon(1e-9));
}
