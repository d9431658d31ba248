#include "cbrc/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <limits>
#include <stdexcept>

namespace cbrc {

DesignSpace::DesignSpace(std::vector<DesignPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("design space must be nonempty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!index_.emplace(points_[i].label, i).second) {
      throw DomainError("duplicate design point label '" + points_[i].label + "'");
    }
  }
}

std::optional<std::size_t> DesignSpace::index_of(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Design::Design(SpacePtr space, std::vector<double> weights) : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw DomainError("design requires a design space");
  if (weights_.size() != space_->size()) {
    throw DomainError("design has " + std::to_string(weights_.size()) + " weights for a space of " +
                      std::to_string(space_->size()) + " points");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw DomainError("design weight at '" + space_->point(i).label + "' must be finite and >= 0");
    }
  }
}

Design Design::zero(SpacePtr space) {
  const std::size_t n = space->size();
  return Design(std::move(space), std::vector<double>(n, 0.0));
}

double Design::total() const {
  double t = 0.0;
  for (double w : weights_) t += w;
  return t;
}

bool Design::is_integral(double tol) const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [tol](double w) { return std::abs(w - std::round(w)) <= tol; });
}

RegressionMap::RegressionMap(SpacePtr space, Matrix rows) : space_(std::move(space)), rows_(std::move(rows)) {
  if (!space_) throw DomainError("regression map requires a design space");
  if (static_cast<std::size_t>(rows_.rows()) != space_->size()) {
    throw DomainError("regression map has " + std::to_string(rows_.rows()) + " rows for a space of " +
                      std::to_string(space_->size()) + " points");
  }
  if (rows_.cols() < 1) throw DomainError("regression dimension p must be >= 1");
  if (!rows_.allFinite()) throw DomainError("regression map has non-finite entries");
  const Eigen::Index rank = numerical_rank(SymMatrix::symmetrized(rows_.transpose() * rows_));
  if (rank < rows_.cols()) {
    throw DomainError("regression vectors span a subspace of dimension " + std::to_string(rank) + " < p = " +
                      std::to_string(rows_.cols()));
  }
}

RegressionMap RegressionMap::from_function(SpacePtr space, Eigen::Index p,
                                           const std::function<Vector(const DesignPoint&)>& f) {
  Matrix rows(static_cast<Eigen::Index>(space->size()), p);
  for (std::size_t i = 0; i < space->size(); ++i) {
    const Vector v = f(space->point(i));
    if (v.size() != p) throw DomainError("regression function returned a vector of wrong length");
    rows.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return RegressionMap(std::move(space), std::move(rows));
}

RegressionMap RegressionMap::polynomial(SpacePtr space, int degree) {
  if (degree < 0) throw DomainError("polynomial degree must be >= 0");
  return from_function(space, degree + 1, [degree](const DesignPoint& pt) {
    if (pt.coordinate.size() != 1) throw DomainError("polynomial regression needs one-dimensional coordinates");
    Vector v(degree + 1);
    double x = 1.0;
    for (int k = 0; k <= degree; ++k) {
      v(k) = x;
      x *= pt.coordinate[0];
    }
    return v;
  });
}

std::string to_string(Relation r) {
  switch (r) {
    case Relation::LessEqual: return "<=";
    case Relation::Equal: return "=";
    case Relation::GreaterEqual: return ">=";
  }
  return "?";
}

Relation relation_from_string(const std::string& s) {
  if (s == "<=" || s == "le") return Relation::LessEqual;
  if (s == "=" || s == "==" || s == "eq") return Relation::Equal;
  if (s == ">=" || s == "ge") return Relation::GreaterEqual;
  throw DomainError("unknown relation '" + s + "' (expected <=, = or >=)");
}

LinearConstraintSet::LinearConstraintSet(std::size_t num_points)
    : lower_(num_points, 0.0), upper_(num_points, std::numeric_limits<double>::infinity()) {}

void LinearConstraintSet::add_row(ConstraintRow row) {
  if (row.coefficients.size() != num_points()) {
    throw DomainError("constraint row '" + row.name + "' has " + std::to_string(row.coefficients.size()) +
                      " coefficients for " + std::to_string(num_points()) + " points");
  }
  if (row.name.empty()) row.name = "row" + std::to_string(rows_.size());
  rows_.push_back(std::move(row));
}

void LinearConstraintSet::set_bounds(std::size_t i, double lower, double upper) {
  if (i >= num_points()) throw DomainError("bound index out of range");
  if (!(lower >= 0.0) || !(upper >= lower)) throw DomainError("bounds must satisfy 0 <= lower <= upper");
  lower_[i] = lower;
  upper_[i] = upper;
}

namespace {

bool relation_holds(double lhs, Relation rel, double rhs, double tol) {
  switch (rel) {
    case Relation::LessEqual: return lhs <= rhs + tol;
    case Relation::Equal: return std::abs(lhs - rhs) <= tol;
    case Relation::GreaterEqual: return lhs >= rhs - tol;
  }
  return false;
}

std::string describe(const std::string& what, double lhs, Relation rel, double rhs) {
  std::ostringstream os;
  os.precision(12);
  os << what << ": " << lhs << " " << to_string(rel) << " " << rhs << " violated";
  return os.str();
}

}  // namespace

FeasibilityReport LinearConstraintSet::check(const std::vector<double>& w, double tol) const {
  FeasibilityReport rep;
  auto fail = [&rep](std::string msg) {
    rep.feasible = false;
    rep.violations.push_back(std::move(msg));
  };
  if (w.size() != num_points()) {
    fail("design has " + std::to_string(w.size()) + " weights, constraints expect " + std::to_string(num_points()));
    return rep;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < lower_[i] - tol) fail(describe("lower bound of point " + std::to_string(i), w[i], Relation::GreaterEqual, lower_[i]));
    if (w[i] > upper_[i] + tol) fail(describe("upper bound of point " + std::to_string(i), w[i], Relation::LessEqual, upper_[i]));
    if (integrality_ && std::abs(w[i] - std::round(w[i])) > tol) {
      fail("integrality of point " + std::to_string(i) + ": weight " + std::to_string(w[i]) + " is fractional");
    }
  }
  if (total_) {
    double sum = 0.0;
    for (double v : w) sum += v;
    if (!relation_holds(sum, total_->relation, total_->value, tol)) {
      fail(describe("total_trials", sum, total_->relation, total_->value));
    }
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) lhs += row.coefficients[i] * w[i];
    if (!relation_holds(lhs, row.relation, row.rhs, tol)) fail(describe(row.name, lhs, row.relation, row.rhs));
  }
  return rep;
}

FeasibilityReport check_feasible(const LinearConstraintSet& constraints, const Design& xi, double tol) {
  return constraints.check(xi.weights(), tol);
}

double CriterionValue::value() const {
  if (!finite_) throw std::logic_error("criterion value is +inf");
  return value_;
}

bool CriterionValue::less_than(const CriterionValue& other) const noexcept {
  if (!finite_) return false;
  if (!other.finite_) return true;
  return value_ < other.value_;
}

std::string CriterionValue::to_string() const {
  if (!finite_) return "+inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

CbrcProblem::CbrcProblem(SpacePtr space, RegressionMap f, std::vector<CbrcTerm> terms, LinearConstraintSet constraints)
    : space_(std::move(space)), f_(std::move(f)), terms_(std::move(terms)), constraints_(std::move(constraints)) {
  if (!space_) throw DomainError("problem requires a design space");
  if (f_.space()->size() != space_->size()) throw DomainError("regression map is over a different space");
  if (terms_.empty()) throw DomainError("criterion needs at least one (B, H) term");
  if (constraints_.num_points() != space_->size()) throw DomainError("constraint set is over a different space");
  const Eigen::Index p = f_.dim();
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto& t = terms_[j];
    const std::string tag = "term " + std::to_string(j + 1);
    if (t.b.dim() != p || t.h.dim() != p) throw DomainError(tag + ": B and H must be p x p with p = " + std::to_string(p));
    const SymEig eb = sym_eig(t.b);
    const double lmax = eb.values(0);
    if (eb.values(p - 1) < -1e-10 * std::max(1.0, lmax)) {
      throw DomainError(tag + ": B is not nonnegative definite (min eigenvalue " + std::to_string(eb.values(p - 1)) + ")");
    }
    try {
      (void)cholesky(t.h);
    } catch (const SingularError&) {
      throw DomainError(tag + ": H is not positive definite");
    }
  }
}

CbrcProblem CbrcProblem::with_constraints(LinearConstraintSet c) const {
  return CbrcProblem(space_, f_, terms_, std::move(c));
}

SymMatrix information_matrix(const std::vector<double>& w, const RegressionMap& f) {
  const Matrix& rows = f.rows();
  if (static_cast<Eigen::Index>(w.size()) != rows.rows()) throw DomainError("design and regression map sizes differ");
  Matrix m = Matrix::Zero(rows.cols(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double wi = w[static_cast<std::size_t>(i)];
    if (wi != 0.0) m.selfadjointView<Eigen::Lower>().rankUpdate(rows.row(i).transpose(), wi);
  }
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return SymMatrix::symmetrized(m);
}

SymMatrix information_matrix(const Design& xi, const RegressionMap& f) { return information_matrix(xi.weights(), f); }

std::vector<CriterionValue> cbrc_terms(const CbrcProblem& problem, const std::vector<double>& w) {
  const SymMatrix m = information_matrix(w, problem.f());
  std::vector<CriterionValue> out;
  out.reserve(problem.s());
  for (const auto& t : problem.terms()) {
    try {
      out.push_back(CriterionValue::finite(trace_of_inverse_product(m + t.b, t.h)));
    } catch (const SingularError&) {
      out.push_back(CriterionValue::infinite());
    }
  }
  return out;
}

CriterionValue cbrc_value(const CbrcProblem& problem, const std::vector<double>& w) {
  double sum = 0.0;
  for (const auto& t : cbrc_terms(problem, w)) {
    if (!t.is_finite()) return CriterionValue::infinite();
    sum += t.value();
  }
  return CriterionValue::finite(sum);
}

CriterionValue cbrc_value(const CbrcProblem& problem, const Design& xi) {
  if (xi.size() != problem.space()->size()) throw DomainError("design is over a different space");
  return cbrc_value(problem, xi.weights());
}

CbrcProblem apply_weights(const CbrcProblem& problem, const std::vector<double>& w) {
  if (w.size() != problem.s()) throw DomainError("need one weight per criterion term");
  std::vector<CbrcTerm> terms = problem.terms();
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (!(w[j] > 0.0) || !std::isfinite(w[j])) throw DomainError("criterion weights must be finite and > 0");
    terms[j].h = w[j] * terms[j].h;
  }
  return CbrcProblem(problem.space(), problem.f(), std::move(terms), problem.constraints());
}

SpacePtr make_grid_space(const std::vector<double>& coordinates) {
  std::vector<DesignPoint> pts;
  pts.reserve(coordinates.size());
  for (double x : coordinates) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    pts.push_back(DesignPoint{buf, {x}});
  }
  return std::make_shared<const DesignSpace>(std::move(pts));
}

}  // namespace cbrc
