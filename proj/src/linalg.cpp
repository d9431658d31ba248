#include "cbrc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace cbrc {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
}

SymMatrix::SymMatrix(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DomainError("symmetric matrix must be square with dim >= 1, got " +
                      std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw DomainError("symmetric matrix has non-finite entries");
  const double scale = std::max(1e-300, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale) {
    throw DomainError("matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  return SymMatrix(Matrix(0.5 * (m + m.transpose())), Unchecked{});
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim), Unchecked{});
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim), Unchecked{}); }

SymMatrix SymMatrix::diagonal(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()), Unchecked{});
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DomainError("dimension mismatch in SymMatrix sum");
  return SymMatrix(a.m_ + b.m_, SymMatrix::Unchecked{});
}

SymMatrix operator*(double c, const SymMatrix& a) { return SymMatrix(c * a.m_, SymMatrix::Unchecked{}); }

Matrix cholesky(const SymMatrix& sm) {
  const Matrix& m = sm.mat();
  const Eigen::Index n = m.rows();
  const double max_diag = m.diagonal().maxCoeff();
  const double threshold = static_cast<double>(n) * kEps * std::max(max_diag, 0.0);
  if (!(max_diag > 0.0)) throw SingularError("cholesky: matrix has no positive diagonal entry");

  Matrix l = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > threshold)) {
      throw SingularError("cholesky: pivot " + std::to_string(j) + " is " + std::to_string(pivot) +
                          ", matrix is not numerically positive definite");
    }
    const double root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (m(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
    }
  }
  return l;
}

SymEig sym_eig(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m.mat());
  if (solver.info() != Eigen::Success) throw ConvergenceError("sym_eig: eigensolver did not converge");
  const Eigen::Index n = m.dim();
  // Eigen returns ascending order.
  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values(k) = solver.eigenvalues()(n - 1 - k);
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

double rank_threshold(const Vector& eigenvalues_desc, Eigen::Index dim) {
  const double lmax = eigenvalues_desc.size() > 0 ? std::max(eigenvalues_desc(0), 0.0) : 0.0;
  return static_cast<double>(dim) * kEps * lmax;
}

Eigen::Index numerical_rank(const SymMatrix& m) {
  const SymEig e = sym_eig(m);
  const double thr = rank_threshold(e.values, m.dim());
  if (!(e.values(0) > 0.0)) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < e.values.size(); ++k) {
    if (e.values(k) >= thr) ++r;
  }
  return r;
}

Matrix lower_solve(const Matrix& lower, const Matrix& rhs) {
  return lower.triangularView<Eigen::Lower>().solve(rhs);
}

double trace_of_inverse_product(const SymMatrix& m, const SymMatrix& h) {
  if (m.dim() != h.dim()) throw DomainError("trace_of_inverse_product: dimension mismatch");
  // Pivots of an exactly singular m can come out above the Cholesky cutoff,
  // so rank is decided on the eigenvalues first.
  if (numerical_rank(m) < m.dim()) throw SingularError("trace_of_inverse_product: matrix is numerically singular");
  const Matrix l = cholesky(m);
  // tr(m^{-1} h) = tr(L^{-1} h L^{-T})
  const Matrix y = lower_solve(l, h.mat());
  const Matrix z = lower_solve(l, y.transpose());
  return z.trace();
}

}  // namespace cbrc
