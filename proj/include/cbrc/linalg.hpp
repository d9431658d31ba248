#pragma once

// Dense symmetric kernels. Everything is factorization based; nothing in the
// library forms an explicit inverse.

#include <Eigen/Dense>

#include "cbrc/errors.hpp"

namespace cbrc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Dense symmetric matrix. Construction checks symmetry and then stores the
/// exactly symmetrized average (m + m^T)/2.
class SymMatrix {
 public:
  SymMatrix() = default;

  /// Validates symmetry to `rel_tol` relative to max|m_ij|; throws DomainError.
  explicit SymMatrix(const Matrix& m, double rel_tol = 1e-12);

  /// Symmetrizes without checking. For matrices symmetric by construction.
  static SymMatrix symmetrized(const Matrix& m);

  static SymMatrix identity(Eigen::Index dim);
  static SymMatrix zero(Eigen::Index dim);
  static SymMatrix diagonal(const Vector& d);

  [[nodiscard]] Eigen::Index dim() const noexcept { return m_.rows(); }
  [[nodiscard]] const Matrix& mat() const noexcept { return m_; }
  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator*(double c, const SymMatrix& a);

 private:
  struct Unchecked {};
  SymMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  Matrix m_;
};

/// Lower-triangular Cholesky factor L with L L^T = m. Throws SingularError when
/// a pivot falls to dim * eps * max diagonal or below.
Matrix cholesky(const SymMatrix& m);

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns, matching `values`
};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
SymEig sym_eig(const SymMatrix& m);

/// Scale-invariant rank threshold: dim * eps * max(|lambda_max|, 0).
double rank_threshold(const Vector& eigenvalues_desc, Eigen::Index dim);

/// Number of eigenvalues at or above `rank_threshold`.
Eigen::Index numerical_rank(const SymMatrix& m);

/// tr(m^{-1} h) via a Cholesky factorization of m. Throws SingularError when m
/// has numerical rank below dim or is not numerically positive definite.
double trace_of_inverse_product(const SymMatrix& m, const SymMatrix& h);

/// Solves L X = B for lower-triangular L.
Matrix lower_solve(const Matrix& lower, const Matrix& rhs);

}  // namespace cbrc
