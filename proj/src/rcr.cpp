#include "cbrc/rcr.hpp"

#include <cmath>

namespace cbrc {

namespace {

SymMatrix inverse_spd(const SymMatrix& m) {
  // D^{-1} enters the problem data as B_2, so it has to be formed once here.
  const Matrix l = cholesky(m);
  const Matrix li = lower_solve(l, Matrix::Identity(m.dim(), m.dim()));
  return SymMatrix::symmetrized(li.transpose() * li);
}

}  // namespace

CbrcProblem linear_pred_problem(const RcrSpec& spec) {
  if (!spec.space || !spec.f) throw DomainError("RCR spec needs a design space and a regression map");
  if (spec.n < 2) throw DomainError("RCR model needs n >= 2 individuals");
  if (spec.m < 1) throw DomainError("RCR model needs m >= 1 trials per individual");
  const auto* lin = std::get_if<LinearCriterion>(&spec.criterion);
  if (!lin) throw DomainError("linear_pred_problem needs a linear criterion");
  const Eigen::Index p = spec.f->dim();
  if (spec.d.dim() != p || lin->a.dim() != p) throw DomainError("D and A must be p x p");
  try {
    (void)cholesky(lin->a);
  } catch (const SingularError&) {
    throw DomainError("A is not positive definite");
  }
  // D is a covariance scale, so nonsingular means positive definite.
  SymMatrix d_inv;
  try {
    d_inv = inverse_spd(spec.d);
  } catch (const SingularError&) {
    throw DomainError("D is singular or not positive definite");
  }
  std::vector<CbrcTerm> terms{
      {SymMatrix::zero(p), lin->a},
      {d_inv, static_cast<double>(spec.n - 1) * lin->a},
  };
  LinearConstraintSet c(spec.space->size());
  c.set_total_trials(Relation::Equal, static_cast<double>(spec.m));
  return CbrcProblem(spec.space, *spec.f, std::move(terms), std::move(c));
}

SymMatrix imse_matrix(const RegressionMap& f, const std::vector<double>& nu) {
  if (nu.size() != f.space()->size()) throw DomainError("nu needs one weight per design point");
  for (double v : nu) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("nu weights must be finite and >= 0");
  }
  const SymMatrix v = information_matrix(nu, f);
  try {
    (void)cholesky(v);
  } catch (const SingularError&) {
    throw DomainError("V = sum nu(x) f(x) f(x)^T is singular");
  }
  return v;
}

CbrcProblem imse_problem(const RcrSpec& spec) {
  const auto* imse = std::get_if<ImseCriterion>(&spec.criterion);
  if (!imse) throw DomainError("imse_problem needs an IMSE criterion");
  if (!spec.f) throw DomainError("RCR spec needs a regression map");
  RcrSpec lin = spec;
  lin.criterion = LinearCriterion{imse_matrix(*spec.f, imse->nu)};
  return linear_pred_problem(lin);
}

CbrcProblem rcr_problem(const RcrSpec& spec) {
  if (std::holds_alternative<LinearCriterion>(spec.criterion)) return linear_pred_problem(spec);
  return imse_problem(spec);
}

double slope_variance_from_rho(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  return rho / (1.0 - rho);
}

void add_triple_rows(LinearConstraintSet& c) {
  const std::size_t d = c.num_points();
  if (d < 3) throw DomainError("triple rows need at least 3 design points");
  for (std::size_t k = 0; k + 2 < d; ++k) {
    std::vector<double> coef(d, 0.0);
    coef[k] = coef[k + 1] = coef[k + 2] = 1.0;
    c.add_row({std::move(coef), Relation::LessEqual, 1.0, "triple" + std::to_string(k)});
  }
}

CbrcProblem StraightLineExample::build() const {
  if (grid_size < 2) throw DomainError("grid needs at least 2 points");
  const double delta2 = slope_variance_from_rho(rho);
  std::vector<double> xs;
  for (int k = 0; k < grid_size; ++k) xs.push_back(static_cast<double>(k) / (grid_size - 1));
  RcrSpec spec;
  spec.space = make_grid_space(xs);
  spec.f = std::make_shared<const RegressionMap>(RegressionMap::polynomial(spec.space, 1));
  spec.n = individuals;
  spec.m = trials;
  Vector dd(2);
  dd << intercept_variance, delta2;
  spec.d = SymMatrix::diagonal(dd);
  spec.criterion = ImseCriterion{std::vector<double>(xs.size(), 1.0 / grid_size)};
  CbrcProblem prob = imse_problem(spec);
  if (!triple_rows) return prob;
  LinearConstraintSet c = prob.constraints();
  add_triple_rows(c);
  return prob.with_constraints(std::move(c));
}

CbrcProblem paper_example(double rho, bool triple_rows) {
  StraightLineExample ex;
  ex.rho = rho;
  ex.triple_rows = triple_rows;
  return ex.build();
}

}  // namespace cbrc
