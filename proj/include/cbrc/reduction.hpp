#pragma once

// Conversion of a compound Bayes risk problem into linearly constrained
// A-optimality on an artificial model.
//
// The extended space holds s copies {j} x X of the original points followed,
// for each j, by r_j = rank(K_j^{-1} B_j K_j^{-T}) auxiliary points. The
// regression vector of (j, x) is K_j^{-1} f(x) placed in the j-th p-block of
// R^{sp}; the auxiliary points of block j carry the rank-one pieces u_j of
// K_j^{-1} B_j K_j^{-T}. With the copies coupled to block 1 and the auxiliary
// weights fixed to 1, the artificial information matrix is block diagonal with
// blocks K_j^{-1} (M + B_j) K_j^{-T}, so tr(M~^{-1}) equals the CBRC.

#include <memory>
#include <string>
#include <vector>

#include "cbrc/design.hpp"

namespace cbrc {

struct ExtendedPoint {
  enum class Kind { Copy, Auxiliary };
  Kind kind = Kind::Copy;
  std::size_t block = 0;  // 0-based j
  std::size_t index = 0;  // original point index (Copy) or k within Y_j (Auxiliary)
  std::string label;
};

class ArtificialProblem {
 public:
  [[nodiscard]] const CbrcProblem& base() const noexcept { return *base_; }
  [[nodiscard]] std::size_t s() const noexcept { return factors_.size(); }
  [[nodiscard]] Eigen::Index p() const noexcept { return base_->p(); }
  [[nodiscard]] std::size_t num_original() const noexcept { return base_->space()->size(); }
  [[nodiscard]] const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }

  [[nodiscard]] const SpacePtr& extended_space() const noexcept { return extended_space_; }
  [[nodiscard]] const std::vector<ExtendedPoint>& extended_points() const noexcept { return points_; }
  /// Row i is f~ of extended point i (length s*p).
  [[nodiscard]] const Matrix& f_tilde() const noexcept { return f_tilde_; }
  /// Lower Cholesky factor K_j of H_j.
  [[nodiscard]] const Matrix& factor(std::size_t j) const { return factors_.at(j); }
  /// Columns are u_j(y_1), ..., u_j(y_{r_j}).
  [[nodiscard]] const Matrix& aux_vectors(std::size_t j) const { return aux_.at(j); }
  /// Extended index of (j, x).
  [[nodiscard]] std::size_t copy_index(std::size_t j, std::size_t x) const { return j * num_original() + x; }
  /// Extended index of auxiliary point k of block j.
  [[nodiscard]] std::size_t aux_index(std::size_t j, std::size_t k) const { return aux_offset_.at(j) + k; }

  /// Lifted base constraints on block 1, coupling equalities for blocks 2..s,
  /// and auxiliary weights fixed to 1 through bounds.
  [[nodiscard]] const LinearConstraintSet& constraints() const noexcept { return constraints_; }
  /// Number of coupling equality rows, which come first in constraints().rows().
  [[nodiscard]] std::size_t num_coupling_rows() const noexcept { return num_coupling_; }

  [[nodiscard]] std::shared_ptr<const CbrcProblem> base_ptr() const noexcept { return base_; }

 private:
  friend ArtificialProblem build_artificial(std::shared_ptr<const CbrcProblem> problem);
  ArtificialProblem() : constraints_(0) {}

  std::shared_ptr<const CbrcProblem> base_;
  std::vector<Matrix> factors_;
  std::vector<Matrix> aux_;
  std::vector<std::size_t> ranks_;
  std::vector<std::size_t> aux_offset_;
  std::vector<ExtendedPoint> points_;
  SpacePtr extended_space_;
  Matrix f_tilde_;
  LinearConstraintSet constraints_;
  std::size_t num_coupling_ = 0;
};

/// Throws DomainError if some H_j is not positive definite.
ArtificialProblem build_artificial(std::shared_ptr<const CbrcProblem> problem);
ArtificialProblem build_artificial(const CbrcProblem& problem);

/// M~(xi~) = sum xi~(x~) f~(x~) f~(x~)^T, an sp x sp matrix.
SymMatrix information_matrix_artificial(const ArtificialProblem& ap, const std::vector<double>& xi_tilde);

/// A-criterion tr(M~^{-1}) on the artificial model, +inf when M~ is singular.
CriterionValue a_criterion(const ArtificialProblem& ap, const std::vector<double>& xi_tilde);

/// The unique coupled extended design whose block 1 is xi.
std::vector<double> lift_design(const ArtificialProblem& ap, const Design& xi);

/// Restriction of xi~ to block 1. Throws InfeasibleError when coupling or
/// fixed auxiliary weights are violated beyond `tol`.
Design recover_design(const ArtificialProblem& ap, const std::vector<double>& xi_tilde, double tol = 1e-7);

}  // namespace cbrc
