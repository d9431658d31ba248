#pragma once

// Finite design spaces, designs, information matrices and the compound Bayes
// risk criterion  Phi(xi) = sum_j tr((M(xi) + B_j)^{-1} H_j).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cbrc/linalg.hpp"

namespace cbrc {

struct DesignPoint {
  std::string label;
  std::vector<double> coordinate;
};

/// Ordered, nonempty list of uniquely labeled points.
class DesignSpace {
 public:
  explicit DesignSpace(std::vector<DesignPoint> points);

  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] const DesignPoint& point(std::size_t i) const { return points_.at(i); }
  [[nodiscard]] const std::vector<DesignPoint>& points() const noexcept { return points_; }
  [[nodiscard]] std::optional<std::size_t> index_of(const std::string& label) const;

 private:
  std::vector<DesignPoint> points_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const DesignSpace>;

/// Nonnegative trial counts over a design space, stored densely.
class Design {
 public:
  Design(SpacePtr space, std::vector<double> weights);
  static Design zero(SpacePtr space);

  [[nodiscard]] const SpacePtr& space() const noexcept { return space_; }
  [[nodiscard]] std::size_t size() const noexcept { return weights_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return weights_[i]; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  [[nodiscard]] double total() const;
  /// Every weight within `tol` of an integer.
  [[nodiscard]] bool is_integral(double tol = 1e-9) const;

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// f: X -> R^p tabulated over a finite space; row i is f(x_i).
class RegressionMap {
 public:
  /// Throws DomainError when the rows do not span R^p.
  RegressionMap(SpacePtr space, Matrix rows);
  static RegressionMap from_function(SpacePtr space, Eigen::Index p,
                                     const std::function<Vector(const DesignPoint&)>& f);
  /// f(x) = (1, x, ..., x^degree) on one-dimensional coordinates.
  static RegressionMap polynomial(SpacePtr space, int degree);

  [[nodiscard]] Eigen::Index dim() const noexcept { return rows_.cols(); }
  [[nodiscard]] const SpacePtr& space() const noexcept { return space_; }
  [[nodiscard]] const Matrix& rows() const noexcept { return rows_; }
  [[nodiscard]] Vector operator()(std::size_t i) const { return rows_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  SpacePtr space_;
  Matrix rows_;
};

enum class Relation { LessEqual, Equal, GreaterEqual };

std::string to_string(Relation r);
Relation relation_from_string(const std::string& s);

struct ConstraintRow {
  std::vector<double> coefficients;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
  std::string name;
};

struct TotalTrials {
  Relation relation = Relation::Equal;
  double value = 0.0;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Linear description of the permissible designs.
class LinearConstraintSet {
 public:
  explicit LinearConstraintSet(std::size_t num_points);

  void add_row(ConstraintRow row);
  void set_total_trials(Relation rel, double value) { total_ = TotalTrials{rel, value}; }
  void clear_total_trials() { total_.reset(); }
  void set_bounds(std::size_t i, double lower, double upper);
  void set_integrality(bool on) { integrality_ = on; }

  [[nodiscard]] std::size_t num_points() const noexcept { return lower_.size(); }
  [[nodiscard]] const std::vector<ConstraintRow>& rows() const noexcept { return rows_; }
  [[nodiscard]] const std::optional<TotalTrials>& total_trials() const noexcept { return total_; }
  [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }
  [[nodiscard]] bool integrality() const noexcept { return integrality_; }

  /// Rows, bounds, total trials and (when flagged) integrality, all within `tol`.
  [[nodiscard]] FeasibilityReport check(const std::vector<double>& w, double tol = 1e-7) const;

 private:
  std::vector<ConstraintRow> rows_;
  std::optional<TotalTrials> total_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  bool integrality_ = false;
};

FeasibilityReport check_feasible(const LinearConstraintSet& constraints, const Design& xi, double tol = 1e-7);

/// Criterion value or the +infinity sentinel for designs that leave some
/// M(xi) + B_j singular. Never carries a floating-point infinity.
class CriterionValue {
 public:
  static CriterionValue finite(double v) { return CriterionValue(v, true); }
  static CriterionValue infinite() { return CriterionValue(0.0, false); }

  [[nodiscard]] bool is_finite() const noexcept { return finite_; }
  /// Throws std::logic_error on the sentinel.
  [[nodiscard]] double value() const;
  /// Finite values order normally; the sentinel compares above all of them.
  [[nodiscard]] bool less_than(const CriterionValue& other) const noexcept;
  [[nodiscard]] std::string to_string() const;

 private:
  CriterionValue(double v, bool f) : value_(v), finite_(f) {}
  double value_;
  bool finite_;
};

struct CbrcTerm {
  SymMatrix b;  // nonnegative definite
  SymMatrix h;  // positive definite
};

/// The design problem: space, regression map, s >= 1 (B_j, H_j) terms and the
/// permissible designs.
class CbrcProblem {
 public:
  CbrcProblem(SpacePtr space, RegressionMap f, std::vector<CbrcTerm> terms, LinearConstraintSet constraints);

  [[nodiscard]] const SpacePtr& space() const noexcept { return space_; }
  [[nodiscard]] const RegressionMap& f() const noexcept { return f_; }
  [[nodiscard]] const std::vector<CbrcTerm>& terms() const noexcept { return terms_; }
  [[nodiscard]] const LinearConstraintSet& constraints() const noexcept { return constraints_; }
  [[nodiscard]] Eigen::Index p() const noexcept { return f_.dim(); }
  [[nodiscard]] std::size_t s() const noexcept { return terms_.size(); }

  [[nodiscard]] CbrcProblem with_constraints(LinearConstraintSet c) const;

 private:
  SpacePtr space_;
  RegressionMap f_;
  std::vector<CbrcTerm> terms_;
  LinearConstraintSet constraints_;
};

/// M(xi) = sum_x xi(x) f(x) f(x)^T.
SymMatrix information_matrix(const Design& xi, const RegressionMap& f);
SymMatrix information_matrix(const std::vector<double>& w, const RegressionMap& f);

/// Phi(xi), or the sentinel when some M(xi) + B_j is numerically singular.
CriterionValue cbrc_value(const CbrcProblem& problem, const Design& xi);
CriterionValue cbrc_value(const CbrcProblem& problem, const std::vector<double>& w);

/// Per-term breakdown tr((M + B_j)^{-1} H_j).
std::vector<CriterionValue> cbrc_terms(const CbrcProblem& problem, const std::vector<double>& w);

/// Replaces H_j by w_j H_j, turning the weighted criterion into a plain one.
CbrcProblem apply_weights(const CbrcProblem& problem, const std::vector<double>& w);

/// Builds a space of one-dimensional points labeled by their coordinate ("%g").
SpacePtr make_grid_space(const std::vector<double>& coordinates);

}  // namespace cbrc
