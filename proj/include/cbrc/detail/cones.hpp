#pragma once

// Jordan algebra and Nesterov-Todd scaling for R_+^l x SOC x ... x SOC.

#include <vector>

#include "cbrc/conic.hpp"

namespace cbrc::detail {

class ConeSet {
 public:
  explicit ConeSet(const ConeDims& dims);

  [[nodiscard]] Eigen::Index size() const noexcept { return size_; }
  [[nodiscard]] Eigen::Index degree() const noexcept { return dims_.degree(); }
  [[nodiscard]] const ConeDims& dims() const noexcept { return dims_; }
  [[nodiscard]] const std::vector<Eigen::Index>& soc_offsets() const noexcept { return offsets_; }

  /// Identity element e.
  [[nodiscard]] Vector identity() const;
  /// max over cones of -(smallest Jordan eigenvalue of x); negative iff x is interior.
  [[nodiscard]] double interior_margin(const Vector& x) const;
  /// Largest alpha >= 0 with x + alpha dx in the cone, for interior x; +inf if unbounded.
  [[nodiscard]] double max_step(const Vector& x, const Vector& dx) const;
  [[nodiscard]] Vector product(const Vector& u, const Vector& v) const;
  /// Solves lambda o x = v for x, lambda interior.
  [[nodiscard]] Vector divide(const Vector& lambda, const Vector& v) const;
  [[nodiscard]] bool interior(const Vector& x) const;

 private:
  ConeDims dims_;
  Eigen::Index size_;
  std::vector<Eigen::Index> offsets_;
};

/// Nesterov-Todd scaling W (symmetric, block diagonal) with W z = W^{-1} s = lambda.
class NtScaling {
 public:
  /// Returns false when s or z is not strictly interior.
  bool compute(const ConeSet& cones, const Vector& s, const Vector& z);

  [[nodiscard]] Vector apply(const Vector& v) const;
  [[nodiscard]] Vector apply_inverse(const Vector& v) const;
  [[nodiscard]] const Vector& lambda() const noexcept { return lambda_; }
  /// Diagonal of W^2 on the nonnegative block.
  [[nodiscard]] const Vector& nonneg_w2() const noexcept { return nonneg_w2_; }
  /// Dense W^2 block of second-order cone i.
  [[nodiscard]] const Matrix& soc_w2(std::size_t i) const { return soc_w2_.at(i); }
  /// W^2 v.
  [[nodiscard]] Vector apply_w2(const Vector& v) const;

 private:
  const ConeSet* cones_ = nullptr;
  Vector nonneg_w_;  // sqrt(s/z)
  Vector nonneg_w2_;
  std::vector<double> eta_;
  std::vector<Vector> wbar_;
  std::vector<Matrix> soc_w2_;
  Vector lambda_;
};

}  // namespace cbrc::detail
