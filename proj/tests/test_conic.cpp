#include "doctest.h"
#include "test_support.hpp"

#include <sstream>

#include "cbrc/conic.hpp"
#include "cbrc/oracle.hpp"
#include "cbrc/rcr.hpp"

using namespace cbrc;
using cbrc::test::rel_err;

namespace {

SparseMatrix dense_to_sparse(const Matrix& m) { return m.sparseView(); }

ConicProgram small_program(const Vector& c, const Matrix& a, const Vector& b, const Matrix& g, const Vector& h,
                           ConeDims cones) {
  ConicProgram cp;
  cp.c = c;
  cp.a = dense_to_sparse(a);
  cp.b = b;
  cp.g = dense_to_sparse(g);
  cp.h = h;
  cp.cones = std::move(cones);
  return cp;
}

CbrcProblem two_point(double total, const SymMatrix& b, const SymMatrix& h) {
  auto space = make_grid_space({0.0, 1.0});
  LinearConstraintSet c(2);
  c.set_total_trials(Relation::Equal, total);
  return CbrcProblem(space, RegressionMap::polynomial(space, 1), {CbrcTerm{b, h}}, c);
}

std::vector<double> table3() {
  std::vector<double> w(51, 0.0);
  w[0] = 1;
  w[3] = 0.602;
  w[26] = 0.398;
  for (int k = 29; k <= 50; k += 3) w[static_cast<std::size_t>(k)] = 1;
  return w;
}

}  // namespace

TEST_CASE("interior point method on hand-sized programs") {
  // min x0 + x1  s.t.  x0 + 2 x1 = 2,  x >= 0   ->  x = (0, 1)
  ConeDims nn;
  nn.nonneg = 2;
  Matrix a(1, 2);
  a << 1, 2;
  auto lp = small_program(Vector::Ones(2), a, Vector::Constant(1, 2.0), -Matrix::Identity(2, 2), Vector::Zero(2), nn);
  auto sol = solve(lp);
  REQUIRE(sol.status == ConicStatus::Optimal);
  CHECK(sol.primal_objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x(1) == doctest::Approx(1.0).epsilon(1e-7));

  // min t  s.t.  ||(1, 1)|| <= t
  ConeDims q;
  q.soc = {3};
  Matrix g(3, 1);
  g << -1, 0, 0;
  Vector h(3);
  h << 0, 1, 1;
  auto soc = small_program(Vector::Ones(1), Matrix(0, 1), Vector(0), g, h, q);
  sol = solve(soc);
  REQUIRE(sol.status == ConicStatus::Optimal);
  CHECK(sol.primal_objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));

  // x >= 1 and x <= 0
  Matrix g2(2, 1);
  g2 << -1, 1;
  Vector h2(2);
  h2 << -1, 0;
  auto infeasible = small_program(Vector::Ones(1), Matrix(0, 1), Vector(0), g2, h2, nn);
  CHECK(solve(infeasible).status == ConicStatus::Infeasible);

  // min -x  s.t. x >= 0
  ConeDims one;
  one.nonneg = 1;
  auto unbounded =
      small_program(-Vector::Ones(1), Matrix(0, 1), Vector(0), -Matrix::Identity(1, 1), Vector::Zero(1), one);
  CHECK(solve(unbounded).status == ConicStatus::Unbounded);
}

TEST_CASE("scalar a-optimality") {
  auto space = make_grid_space({0.0});
  Matrix rows = Matrix::Ones(1, 1);
  LinearConstraintSet c(1);
  c.set_total_trials(Relation::Equal, 10);
  CbrcProblem prob(space, RegressionMap(space, rows), {CbrcTerm{SymMatrix::zero(1), SymMatrix::identity(1)}}, c);
  auto res = solve_approximate(prob);
  REQUIRE(res.status == ConicStatus::Optimal);
  CHECK(std::abs(res.objective - 0.1) <= 1e-7);
  CHECK((*res.design)[0] == doctest::Approx(10.0).epsilon(1e-7));
}

TEST_CASE("two-point straight line against grid search") {
  CbrcProblem prob = two_point(10, SymMatrix::zero(2), SymMatrix::identity(2));
  auto res = solve_approximate(prob);
  REQUIRE(res.status == ConicStatus::Optimal);
  auto grid = grid_search_2pt(prob, 10, 1e-4);
  CHECK(std::abs(res.criterion.value() - grid.value.value()) <= 1e-4);
  CHECK(res.criterion.value() == doctest::Approx(0.5828427124746190).epsilon(1e-8));
  CHECK((*res.design)[0] == doctest::Approx(10 * (2 - std::sqrt(2.0))).epsilon(1e-5));
}

TEST_CASE("random coefficient case without rows") {
  auto res = solve_approximate(paper_example(0.1, false));
  REQUIRE(res.status == ConicStatus::Optimal);
  const Design& xi = *res.design;
  CHECK(xi[50] > 8.0);
  CHECK(xi[50] < 9.0);
  CHECK(xi[0] + xi[50] == doctest::Approx(10.0).epsilon(1e-6));
  for (std::size_t i = 1; i < 50; ++i) CHECK(xi[i] <= 1e-6);
}

TEST_CASE("infeasible design constraints") {
  auto space = make_grid_space({0.0, 1.0});
  LinearConstraintSet c(2);
  c.set_total_trials(Relation::Equal, 10);
  c.add_row({{1, 0}, Relation::LessEqual, 1, "w0"});
  c.add_row({{0, 1}, Relation::LessEqual, 1, "w1"});
  CbrcProblem prob(space, RegressionMap::polynomial(space, 1),
                   {CbrcTerm{SymMatrix::zero(2), SymMatrix::identity(2)}}, c);
  auto res = solve_approximate(prob);
  CHECK(res.status == ConicStatus::Infeasible);
  CHECK_FALSE(res.design.has_value());

  LinearConstraintSet bounds(2);
  bounds.set_total_trials(Relation::Equal, 10);
  bounds.set_bounds(0, 0, 1);
  bounds.set_bounds(1, 0, 1);
  CHECK(solve_approximate(prob.with_constraints(bounds)).status == ConicStatus::Infeasible);
}

TEST_CASE("constrained approximate design") {
  CbrcProblem prob = paper_example(0.1, true);
  auto res = solve_approximate(prob);
  REQUIRE(res.status == ConicStatus::Optimal);
  auto expect = table3();
  for (std::size_t i = 0; i < 51; ++i) CHECK(std::abs((*res.design)[i] - expect[i]) <= 5e-3);
  double at_table = cbrc_value(prob, expect).value();
  CHECK(res.criterion.value() <= at_table);
  CHECK(rel_err(res.criterion.value(), at_table) <= 1e-5);
  CHECK(check_feasible(prob.constraints(), *res.design, 1e-6).feasible);
}

TEST_CASE("objective agrees with the criterion at the returned design") {
  Rng rng(314);
  for (int trial = 0; trial < 15; ++trial) {
    Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(3));
    CbrcProblem prob = random_problem(rng, {p, 1 + rng.below(3), 6, 5.0, false});
    ConicOptions opt;
    auto res = solve_approximate(prob, opt);
    REQUIRE(res.status == ConicStatus::Optimal);
    CHECK(rel_err(res.criterion.value(), res.objective) <= 10 * opt.tol);
    CHECK(res.dual_objective <= res.objective + 1e-9 * std::max(1.0, res.objective));
  }
}

TEST_CASE("scaling the criterion scales the optimum") {
  Rng rng(55);
  for (int trial = 0; trial < 8; ++trial) {
    CbrcProblem prob = random_problem(rng, {2, 2, 5, 4.0, false});
    double c = rng.uniform(0.1, 10);
    auto base = solve_approximate(prob);
    auto scaled = solve_approximate(apply_weights(prob, {c, c}));
    REQUIRE(base.status == ConicStatus::Optimal);
    REQUIRE(scaled.status == ConicStatus::Optimal);
    CHECK(rel_err(scaled.objective, c * base.objective) <= 1e-6);
    // the argmin can be non-unique, so compare criterion values at the two designs
    double cross = cbrc_value(prob, *scaled.design).value();
    CHECK(rel_err(cross, base.criterion.value()) <= 1e-6);
  }
}

TEST_CASE("random two-point problems against grid search") {
  Rng rng(2718);
  for (int trial = 0; trial < 10; ++trial) {
    double total = 1 + static_cast<double>(rng.below(10));
    CbrcProblem prob = two_point(total, random_nnd(rng, 2, static_cast<Eigen::Index>(rng.below(3))), random_pd(rng, 2));
    auto res = solve_approximate(prob);
    REQUIRE(res.status == ConicStatus::Optimal);
    auto grid = grid_search_2pt(prob, total, 1e-4);
    CHECK(std::abs(res.criterion.value() - grid.value.value()) <= 1e-4);
    CHECK(res.criterion.value() <= grid.value.value() + 1e-9);
  }
}

TEST_CASE("program layout and dump") {
  CbrcProblem prob = paper_example(0.1, true);
  ConicProgram cp = build_a_opt_socp(build_artificial(prob));
  CHECK(cp.weight_variable.size() == 51);
  CHECK(cp.variable_names.size() == static_cast<std::size_t>(cp.num_variables()));
  CHECK(cp.inequality_names.size() == static_cast<std::size_t>(cp.g.rows()));
  CHECK(cp.equality_names.size() == static_cast<std::size_t>(cp.a.rows()));
  CHECK(cp.cones.size() == cp.g.rows());
  for (Eigen::Index q : cp.cones.soc) CHECK(q == 3);

  std::ostringstream os;
  write_conic_program(cp, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "conic-program 1");
  std::getline(is, line);
  CHECK(line.rfind("sizes variables " + std::to_string(cp.num_variables()), 0) == 0);
  long vars = 0, eqs = 0, ineqs = 0, cones = 0;
  while (std::getline(is, line)) {
    if (line.rfind("var ", 0) == 0) ++vars;
    if (line.rfind("eq ", 0) == 0) ++eqs;
    if (line.rfind("ineq ", 0) == 0) ++ineqs;
    if (line.rfind("cone ", 0) == 0) ++cones;
  }
  CHECK(vars == cp.num_variables());
  CHECK(eqs == cp.a.rows());
  CHECK(ineqs == cp.g.rows());
  CHECK(cones == 1 + static_cast<long>(cp.cones.soc.size()));

  std::ostringstream again;
  write_conic_program(build_a_opt_socp(build_artificial(prob)), again);
  CHECK(again.str() == os.str());
}

TEST_CASE("points with zero regression vector") {
  auto space = make_grid_space({0.0, 1.0, 2.0});
  Matrix rows(3, 1);
  rows << 1, 0, 2;
  LinearConstraintSet c(3);
  c.set_total_trials(Relation::Equal, 3);
  CbrcProblem prob(space, RegressionMap(space, rows), {CbrcTerm{SymMatrix::zero(1), SymMatrix::identity(1)}}, c);
  auto res = solve_approximate(prob);
  REQUIRE(res.status == ConicStatus::Optimal);
  CHECK(res.objective == doctest::Approx(1.0 / 12.0).epsilon(1e-7));
  CHECK((*res.design)[1] <= 1e-6);
  CHECK((*res.design)[2] == doctest::Approx(3.0).epsilon(1e-6));
}
