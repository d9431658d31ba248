#include "doctest.h"
#include "test_support.hpp"

#include "cbrc/linalg.hpp"
#include "cbrc/oracle.hpp"

using namespace cbrc;
using cbrc::test::rel_err;
using cbrc::test::rel_norm_err;

TEST_CASE("symmetric matrix construction") {
  Matrix m(2, 2);
  m << 1, 2, 2, 3;
  SymMatrix s(m);
  CHECK(s(0, 1) == 2.0);

  Matrix bad(2, 2);
  bad << 1, 2, 2.5, 3;
  CHECK_THROWS_AS(SymMatrix{bad}, DomainError);

  Matrix tiny(2, 2);
  tiny << 1, 2, 2 + 1e-15, 3;
  SymMatrix t(tiny);
  CHECK(t(0, 1) == t(1, 0));

  CHECK_THROWS_AS(SymMatrix{Matrix(2, 3)}, DomainError);
}

TEST_CASE("cholesky") {
  Matrix m(2, 2);
  m << 4, 2, 2, 5;
  Matrix l = cholesky(SymMatrix(m));
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);

  Matrix sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(cholesky(SymMatrix(sing)), SingularError);
  CHECK_THROWS_AS(cholesky(SymMatrix::zero(3)), SingularError);

  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(cholesky(SymMatrix(indef)), SingularError);
}

TEST_CASE("cholesky reconstruction on random matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(6));
    SymMatrix a = random_pd(rng, p);
    Matrix l = cholesky(a);
    CHECK(rel_norm_err(l * l.transpose(), a.mat()) <= 1e-12);
    CHECK(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero());
  }
}

TEST_CASE("symmetric eigendecomposition") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  SymEig e = sym_eig(SymMatrix(m));
  CHECK(e.values(0) == doctest::Approx(3.0));
  CHECK(e.values(1) == doctest::Approx(1.0));

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(6));
    SymMatrix a = random_nnd(rng, p, static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(p) + 1)));
    SymEig d = sym_eig(a);
    Matrix rec = d.vectors * d.values.asDiagonal() * d.vectors.transpose();
    CHECK((rec - a.mat()).norm() <= 1e-10 * std::max(1.0, a.mat().norm()));
    CHECK((d.vectors.transpose() * d.vectors - Matrix::Identity(p, p)).norm() <= 1e-10);
    for (Eigen::Index i = 1; i < p; ++i) CHECK(d.values(i - 1) >= d.values(i));
  }
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(SymMatrix::identity(3)) == 3);
  CHECK(numerical_rank(SymMatrix::zero(3)) == 0);
  Rng rng(9);
  for (Eigen::Index r = 0; r <= 4; ++r) CHECK(numerical_rank(random_nnd(rng, 4, r)) == r);
}

TEST_CASE("trace of inverse product") {
  Matrix m(2, 2);
  m << 4, 2, 2, 5;
  CHECK(trace_of_inverse_product(SymMatrix(m), SymMatrix::identity(2)) == doctest::Approx(9.0 / 16.0).epsilon(1e-14));
  CHECK(trace_of_inverse_product(SymMatrix::diagonal(Vector::Constant(3, 2.0)), SymMatrix::identity(3)) ==
        doctest::Approx(1.5));
  CHECK_THROWS_AS(trace_of_inverse_product(SymMatrix::zero(2), SymMatrix::identity(2)), SingularError);

  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(5));
    SymMatrix a = random_pd(rng, p);
    SymMatrix h = random_pd(rng, p);
    double direct = (a.mat().inverse() * h.mat()).trace();
    CHECK(rel_err(trace_of_inverse_product(a, h), direct) <= 1e-10);
  }
}

TEST_CASE("lower triangular solve") {
  Matrix l(2, 2);
  l << 2, 0, 1, 4;
  Matrix b(2, 1);
  b << 2, 9;
  Matrix x = lower_solve(l, b);
  CHECK(x(0, 0) == doctest::Approx(1.0));
  CHECK(x(1, 0) == doctest::Approx(2.0));
}
