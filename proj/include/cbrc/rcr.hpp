#pragma once

// Random coefficient regression front-end.
//
// Individuals i = 1..n share one design of m trials; beta_i has mean beta and
// covariance sigma^2 D. The prediction criteria
//   L(xi)    = tr(M^{-1} A) + (n - 1) tr((M + D^{-1})^{-1} A)
//   IMSE(xi) = L(xi) with A = V = sum_x nu(x) f(x) f(x)^T
// are both written without the common factor sigma^2, which does not move the
// minimizer and is therefore not an input anywhere.

#include <variant>

#include "cbrc/design.hpp"

namespace cbrc {

struct LinearCriterion {
  SymMatrix a;
};
struct ImseCriterion {
  std::vector<double> nu;
};

struct RcrSpec {
  SpacePtr space;
  std::shared_ptr<const RegressionMap> f;
  int n = 2;
  int m = 1;
  SymMatrix d;
  std::variant<LinearCriterion, ImseCriterion> criterion;
};

/// s = 2 terms (0, A) and (D^{-1}, (n-1) A) with total trials fixed to m.
CbrcProblem linear_pred_problem(const RcrSpec& spec);

/// V = sum nu(x) f(x) f(x)^T, then the linear prediction problem with A = V.
CbrcProblem imse_problem(const RcrSpec& spec);

/// Dispatches on the criterion alternative.
CbrcProblem rcr_problem(const RcrSpec& spec);

/// V for the given point weights; throws DomainError when singular.
SymMatrix imse_matrix(const RegressionMap& f, const std::vector<double>& nu);

/// Straight-line model f(x) = (1, x) on {k/50 : k = 0..50} with n = 100,
/// m = 10, D = diag(0.01, rho/(1-rho)) and the uniform-measure IMSE criterion.
/// With `triple_rows`, adds the rows w_k + w_{k+1} + w_{k+2} <= 1.
CbrcProblem paper_example(double rho, bool triple_rows);

/// Builder for the straight-line family with arbitrary grid size and counts.
struct StraightLineExample {
  int grid_size = 51;
  int individuals = 100;
  int trials = 10;
  double intercept_variance = 0.01;
  double rho = 0.1;
  bool triple_rows = false;

  [[nodiscard]] CbrcProblem build() const;
};

/// delta = rho / (1 - rho); DomainError outside (0, 1).
double slope_variance_from_rho(double rho);

/// The rows w_k + w_{k+1} + w_{k+2} <= 1, k = 0..d-3.
void add_triple_rows(LinearConstraintSet& c);

}  // namespace cbrc
