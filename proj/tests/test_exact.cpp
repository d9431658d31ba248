#include "doctest.h"
#include "test_support.hpp"

#include "cbrc/exact.hpp"
#include "cbrc/oracle.hpp"
#include "cbrc/rcr.hpp"

using namespace cbrc;
using cbrc::test::rel_err;

namespace {

CbrcProblem tiny() {
  auto space = make_grid_space({0.0, 0.5, 1.0});
  LinearConstraintSet c(3);
  c.set_total_trials(Relation::Equal, 4);
  c.set_integrality(true);
  return CbrcProblem(space, RegressionMap::polynomial(space, 1),
                     {CbrcTerm{SymMatrix::zero(2), SymMatrix::identity(2)}}, c);
}

std::pair<double, double> ends(const BnbResult& r) { return {(*r.incumbent)[0], (*r.incumbent)[50]}; }

bool only_ends(const Design& xi) {
  for (std::size_t i = 1; i < 50; ++i)
    if (xi[i] != 0.0) return false;
  return true;
}

// Every integer design with lower <= w <= upper, sum == total.
void boxed(const std::vector<double>& lo, const std::vector<double>& hi, int total, std::vector<double>& cur,
           std::size_t i, std::vector<std::vector<double>>& out) {
  if (i + 1 == cur.size()) {
    if (total >= lo[i] && total <= hi[i]) {
      cur[i] = total;
      out.push_back(cur);
    }
    return;
  }
  for (int v = static_cast<int>(lo[i]); v <= std::min<double>(hi[i], total); ++v) {
    cur[i] = v;
    boxed(lo, hi, total - v, cur, i + 1, out);
  }
}

}  // namespace

TEST_CASE("unconstrained random coefficient designs") {
  auto high = solve_exact(paper_example(0.5, false));
  REQUIRE(high.status == BnbStatus::Optimal);
  CHECK(ends(high) == std::pair<double, double>(1, 9));
  CHECK(only_ends(*high.incumbent));
  CHECK(high.relative_gap <= 1e-6);

  auto low = solve_exact(paper_example(0.003, false));
  REQUIRE(low.status == BnbStatus::Optimal);
  CHECK(ends(low) == std::pair<double, double>(5, 5));
  CHECK(only_ends(*low.incumbent));
}

TEST_CASE("tiny instance matches enumeration") {
  CbrcProblem prob = tiny();
  auto res = solve_exact(prob);
  REQUIRE(res.status == BnbStatus::Optimal);
  auto oracle = enumerate_exact(prob, 4);
  CHECK(rel_err(res.incumbent_value, oracle.value.value()) <= 1e-6);
  CHECK(res.incumbent->weights() == std::vector<double>{2, 0, 2});
  CHECK(res.incumbent_value == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("unbounded region is rejected") {
  CbrcProblem prob = tiny();
  LinearConstraintSet open(3);
  open.set_total_trials(Relation::GreaterEqual, 4);
  CHECK_THROWS_AS(solve_exact(prob.with_constraints(open)), DomainError);
  LinearConstraintSet capped(3);
  for (std::size_t i = 0; i < 3; ++i) capped.set_bounds(i, 0, 2);
  auto res = solve_exact(prob.with_constraints(capped));
  REQUIRE(res.status == BnbStatus::Optimal);
  CHECK(res.incumbent->weights() == std::vector<double>{2, 2, 2});
}

TEST_CASE("infeasible exact problem") {
  auto space = make_grid_space({0.0, 1.0});
  LinearConstraintSet c(2);
  c.set_total_trials(Relation::Equal, 10);
  c.set_bounds(0, 0, 1);
  c.set_bounds(1, 0, 1);
  CbrcProblem prob(space, RegressionMap::polynomial(space, 1),
                   {CbrcTerm{SymMatrix::zero(2), SymMatrix::identity(2)}}, c);
  auto res = solve_exact(prob);
  CHECK(res.status == BnbStatus::Infeasible);
  CHECK_FALSE(res.incumbent.has_value());

  // relaxation feasible, no integer point: 2 w0 = 3
  LinearConstraintSet odd(2);
  odd.set_total_trials(Relation::Equal, 4);
  odd.add_row({{2, 0}, Relation::Equal, 3, "half"});
  CHECK(solve_exact(prob.with_constraints(odd)).status == BnbStatus::Infeasible);
}

TEST_CASE("rounding") {
  CbrcProblem prob = tiny();
  Design integral(prob.space(), {1, 2, 1});
  auto same = round_incumbent(prob, integral);
  REQUIRE(same.has_value());
  CHECK(same->weights() == integral.weights());

  auto space = make_grid_space({0.0, 1.0});
  LinearConstraintSet c(2);
  c.set_total_trials(Relation::Equal, 10);
  CbrcProblem line(space, RegressionMap::polynomial(space, 1), {CbrcTerm{SymMatrix::zero(2), SymMatrix::identity(2)}},
                   c);
  auto r = round_incumbent(line, Design(space, {4.6, 5.4}));
  REQUIRE(r.has_value());
  double a = cbrc_value(line, std::vector<double>{5, 5}).value();
  double b = cbrc_value(line, std::vector<double>{4, 6}).value();
  CHECK(r->weights() == (a <= b ? std::vector<double>{5, 5} : std::vector<double>{4, 6}));

  CbrcProblem ex = paper_example(0.1, true);
  std::vector<double> w(51, 0.0);
  w[0] = 1;
  w[3] = 0.602;
  w[26] = 0.398;
  for (int k = 29; k <= 50; k += 3) w[static_cast<std::size_t>(k)] = 1;
  auto rounded = round_incumbent(ex, Design(ex.space(), w));
  if (rounded) {
    CHECK(rounded->is_integral());
    CHECK(check_feasible(ex.constraints(), *rounded, 1e-9).feasible);
  }
}

TEST_CASE("node relaxations bound every integer design in the box") {
  Rng rng(4242);
  for (int trial = 0; trial < 12; ++trial) {
    std::size_t d = 2 + rng.below(3);
    int m = 2 + static_cast<int>(rng.below(4));
    CbrcProblem prob = random_problem(rng, {2, 1 + rng.below(2), std::max<std::size_t>(d, 2), double(m), true});
    std::size_t n = prob.space()->size();
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = static_cast<double>(rng.below(2));
      hi[i] = lo[i] + static_cast<double>(rng.below(static_cast<std::size_t>(m)));
    }
    auto node = solve_node_relaxation(prob, lo, hi);
    std::vector<std::vector<double>> inside;
    std::vector<double> cur(n);
    boxed(lo, hi, m, cur, 0, inside);
    if (node.status != ConicStatus::Optimal) {
      CHECK(node.status == ConicStatus::Infeasible);
      CHECK(inside.empty());
      continue;
    }
    for (const auto& w : inside) {
      auto v = cbrc_value(prob, w);
      if (v.is_finite()) CHECK(node.bound <= v.value() * (1 + 1e-7) + 1e-9);
    }
  }
}

TEST_CASE("determinism and monotone progress") {
  CbrcProblem prob = paper_example(0.03, true);
  std::vector<double> bounds;
  BnbOptions opt;
  opt.log_interval = 1;
  opt.progress = [&](const BnbProgress& p) { bounds.push_back(p.best_bound); };
  auto a = solve_exact(prob, opt);
  auto b = solve_exact(prob);
  REQUIRE(a.status == BnbStatus::Optimal);
  CHECK(a.incumbent->weights() == b.incumbent->weights());
  CHECK(a.nodes == b.nodes);
  CHECK(a.incumbent_value == b.incumbent_value);
  for (std::size_t i = 1; i < a.incumbent_history.size(); ++i)
    CHECK(a.incumbent_history[i] <= a.incumbent_history[i - 1]);
  REQUIRE_FALSE(bounds.empty());
  for (std::size_t i = 1; i < bounds.size(); ++i) CHECK(bounds[i] >= bounds[i - 1] - 1e-12 * std::abs(bounds[i - 1]));
  CHECK(a.best_bound <= a.incumbent_value * (1 + 1e-12));
}

TEST_CASE("node limit") {
  BnbOptions opt;
  opt.node_limit = 1;
  auto res = solve_exact(paper_example(0.03, true), opt);
  CHECK(res.nodes <= 1);
  if (res.status != BnbStatus::Optimal) CHECK(res.status == BnbStatus::NodeLimit);
}
