#include "doctest.h"
#include "test_support.hpp"

#include "cbrc/exact.hpp"
#include "cbrc/oracle.hpp"
#include "cbrc/rcr.hpp"

using namespace cbrc;

namespace {

CbrcProblem restrict_to_ends(const CbrcProblem& full, double total) {
  auto space = make_grid_space({0.0, 1.0});
  Matrix rows(2, full.p());
  rows.row(0) = full.f().rows().row(0);
  rows.row(1) = full.f().rows().row(static_cast<Eigen::Index>(full.space()->size() - 1));
  LinearConstraintSet c(2);
  c.set_total_trials(Relation::Equal, total);
  return CbrcProblem(space, RegressionMap(space, rows), full.terms(), c);
}

CbrcProblem line(std::vector<double> xs, double total) {
  auto space = make_grid_space(xs);
  LinearConstraintSet c(xs.size());
  c.set_total_trials(Relation::Equal, total);
  return CbrcProblem(space, RegressionMap::polynomial(space, 1), {CbrcTerm{SymMatrix::zero(2), SymMatrix::identity(2)}},
                     c);
}

}  // namespace

TEST_CASE("rng stream is fixed") {
  Rng a(0);
  CHECK(a.next() == 0xE220A8397B1DCDAFull);
  Rng b(42), c(42);
  for (int i = 0; i < 100; ++i) CHECK(b.next() == c.next());
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(5) < 5);
  }
}

TEST_CASE("enumeration") {
  CbrcProblem ends = restrict_to_ends(paper_example(0.5, false), 10);
  auto best = enumerate_exact(ends, 10);
  CHECK(best.best.weights() == std::vector<double>{1, 9});

  auto one_space = make_grid_space({0.0});
  Matrix one = Matrix::Ones(1, 1);
  LinearConstraintSet c(1);
  CbrcProblem single(one_space, RegressionMap(one_space, one), {CbrcTerm{SymMatrix::zero(1), SymMatrix::identity(1)}}, c);
  auto unique = enumerate_exact(single, 3);
  CHECK(unique.best.weights() == std::vector<double>{3});
  CHECK(unique.value.value() == doctest::Approx(1.0 / 3.0));

  CbrcProblem tiny = line({0.0, 0.5, 1.0}, 4);
  auto e = enumerate_exact(tiny, 4);
  auto b = solve_exact(tiny);
  CHECK(e.best.weights() == std::vector<double>{2, 0, 2});
  CHECK(e.value.value() == doctest::Approx(b.incumbent_value).epsilon(1e-9));

  CHECK_THROWS_AS(enumerate_exact(paper_example(0.1, false), 10), TooLargeError);
  CHECK_THROWS_AS(enumerate_exact(line({0.0, 1.0}, 1), 1), InfeasibleError);
}

TEST_CASE("enumeration respects rows") {
  CbrcProblem base = line({0.0, 0.25, 0.5, 0.75, 1.0}, 2);
  LinearConstraintSet c = base.constraints();
  add_triple_rows(c);
  auto best = enumerate_exact(base.with_constraints(c), 2);
  CHECK_THROWS_AS(enumerate_exact(base.with_constraints(c), 3), InfeasibleError);
  CHECK(check_feasible(c, best.best).feasible);
}

TEST_CASE("two-point grid search") {
  CbrcProblem sym = line({-1.0, 1.0}, 10);
  auto g = grid_search_2pt(sym, 10, 1e-3);
  CHECK(std::abs(g.best[0] - 5.0) <= 1e-3);

  CbrcProblem ends = restrict_to_ends(paper_example(0.1, false), 10);
  auto fine = grid_search_2pt(ends, 10, 1e-4);
  CHECK(fine.best[0] > 1.0);
  CHECK(fine.best[0] < 2.0);
  auto coarse = grid_search_2pt(ends, 10, 1e-3);
  CHECK(std::abs(fine.value.value() - coarse.value.value()) <= 1e-6);

  CbrcProblem straight = line({0.0, 1.0}, 10);
  auto s = grid_search_2pt(straight, 10, 1e-4);
  CHECK(s.value.value() == doctest::Approx((3 + 2 * std::sqrt(2.0)) / 10).epsilon(1e-7));
  CHECK(std::abs(s.best[0] - 10 * (2 - std::sqrt(2.0))) <= 1e-4);

  CHECK_THROWS_AS(grid_search_2pt(line({0.0, 0.5, 1.0}, 10), 10, 1e-3), DomainError);
}

TEST_CASE("random feasible designs") {
  auto space = make_grid_space({0, 1, 2, 3, 4, 5});
  LinearConstraintSet c(6);
  c.set_total_trials(Relation::Equal, 10);
  auto a = random_feasible(space, c, 5);
  REQUIRE(a.has_value());
  CHECK(a->total() == doctest::Approx(10.0));
  for (double w : a->weights()) CHECK(w >= 0.0);
  auto b = random_feasible(space, c, 5);
  CHECK(a->weights() == b->weights());

  CbrcProblem ex = paper_example(0.1, true);
  LinearConstraintSet exact = ex.constraints();
  exact.set_integrality(true);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto d = random_feasible(ex.space(), exact, seed);
    REQUIRE(d.has_value());
    CHECK(check_feasible(exact, *d).feasible);
  }

  LinearConstraintSet impossible(2);
  impossible.set_total_trials(Relation::Equal, 5);
  impossible.set_bounds(0, 0, 1);
  impossible.set_bounds(1, 0, 1);
  CHECK_FALSE(random_feasible(make_grid_space({0, 1}), impossible, 1, 10).has_value());
}

TEST_CASE("random generators") {
  Rng rng(123);
  for (int i = 0; i < 20; ++i) {
    SymMatrix pd = random_pd(rng, 3);
    CHECK(sym_eig(pd).values(2) > 0.0);
    Eigen::Index r = static_cast<Eigen::Index>(rng.below(4));
    CHECK(numerical_rank(random_nnd(rng, 3, r)) == r);
  }
  Rng x(9), y(9);
  CbrcProblem p = random_problem(x, {2, 2, 5, 3.0, true});
  CbrcProblem q = random_problem(y, {2, 2, 5, 3.0, true});
  CHECK(p.f().rows() == q.f().rows());
  CHECK(p.terms()[1].b.mat() == q.terms()[1].b.mat());
  CHECK(p.constraints().integrality());
}
