#include "cbrc/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace cbrc {

std::uint64_t Rng::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::size_t Rng::below(std::size_t n) {
  if (n == 0) return 0;
  return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

OracleResult enumerate_exact(const CbrcProblem& problem, int total, std::uint64_t max_candidates) {
  if (total < 0) throw DomainError("enumerate_exact: total must be >= 0");
  const int d = static_cast<int>(problem.space()->size());
  const double count = binomial(total + d - 1, d - 1);
  if (count > static_cast<double>(max_candidates)) {
    throw TooLargeError("enumerate_exact: " + std::to_string(count) + " compositions exceed the budget of " +
                        std::to_string(max_candidates));
  }
  const LinearConstraintSet& c = problem.constraints();
  std::vector<double> w(static_cast<std::size_t>(d), 0.0);
  std::optional<std::vector<double>> best;
  CriterionValue best_value = CriterionValue::infinite();

  // Increasing lexicographic order: the first coordinate varies slowest.
  auto visit = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == d - 1) {
      w[static_cast<std::size_t>(pos)] = remaining;
      if (!c.check(w, 1e-9).feasible) return;
      const CriterionValue v = cbrc_value(problem, w);
      if (v.is_finite() && (!best || v.less_than(best_value))) {
        best = w;
        best_value = v;
      }
      return;
    }
    for (int k = 0; k <= remaining; ++k) {
      w[static_cast<std::size_t>(pos)] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  visit(visit, 0, total);
  if (!best) throw InfeasibleError("enumerate_exact: no feasible design with a finite criterion value");
  return {Design(problem.space(), *best), best_value};
}

OracleResult grid_search_2pt(const CbrcProblem& problem, double total, double step) {
  if (problem.space()->size() != 2) throw DomainError("grid_search_2pt needs a two-point design space");
  if (!(step > 0.0) || !(total >= 0.0)) throw DomainError("grid_search_2pt needs step > 0 and total >= 0");
  const long steps = static_cast<long>(std::floor(total / step + 1e-9));
  std::vector<double> best;
  CriterionValue best_value = CriterionValue::infinite();
  for (long k = 0; k <= steps; ++k) {
    const double w0 = std::min(total, static_cast<double>(k) * step);
    const std::vector<double> w{w0, total - w0};
    const CriterionValue v = cbrc_value(problem, w);
    if (v.is_finite() && (best.empty() || v.less_than(best_value))) {
      best = w;
      best_value = v;
    }
  }
  if (best.empty()) throw InfeasibleError("grid_search_2pt: every split is singular");
  return {Design(problem.space(), best), best_value};
}

namespace {

// Largest amount that can be added to point i without breaking an upper bound
// or a row that increases with w_i.
double capacity(const LinearConstraintSet& c, const std::vector<double>& w, std::size_t i) {
  double cap = c.upper()[i] - w[i];
  for (const auto& row : c.rows()) {
    const double a = row.coefficients[i];
    if (a == 0.0) continue;
    double lhs = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) lhs += row.coefficients[k] * w[k];
    if (row.relation == Relation::LessEqual && a > 0.0) cap = std::min(cap, (row.rhs - lhs) / a);
    if (row.relation == Relation::GreaterEqual && a < 0.0) cap = std::min(cap, (lhs - row.rhs) / -a);
  }
  return std::max(cap, 0.0);
}

}  // namespace

std::optional<Design> random_feasible(const SpacePtr& space, const LinearConstraintSet& c, std::uint64_t seed,
                                      int attempts) {
  const std::size_t d = space->size();
  if (c.num_points() != d) throw DomainError("random_feasible: constraints are over a different space");
  Rng rng(seed);
  const bool integral = c.integrality();
  for (int attempt = 0; attempt < attempts; ++attempt) {
    std::vector<double> w(d);
    for (std::size_t i = 0; i < d; ++i) w[i] = integral ? std::ceil(c.lower()[i] - 1e-9) : c.lower()[i];
    double target;
    if (c.total_trials()) {
      target = c.total_trials()->value;
      if (c.total_trials()->relation == Relation::LessEqual) target *= rng.uniform(0.5, 1.0);
      if (c.total_trials()->relation == Relation::GreaterEqual) target *= rng.uniform(1.0, 1.5);
    } else {
      target = rng.uniform(1.0, 2.0 * static_cast<double>(d));
    }
    if (integral) target = std::round(target);
    double sum = 0.0;
    for (double v : w) sum += v;
    double remaining = target - sum;
    for (std::size_t guard = 0; remaining > 1e-12 && guard < 50 * d + 100; ++guard) {
      std::vector<std::size_t> open;
      for (std::size_t i = 0; i < d; ++i) {
        if (capacity(c, w, i) >= (integral ? 1.0 - 1e-9 : 1e-12)) open.push_back(i);
      }
      if (open.empty()) break;
      const std::size_t i = open[rng.below(open.size())];
      double amount;
      if (integral) {
        amount = 1.0;
      } else {
        const double cap = std::min(capacity(c, w, i), remaining);
        amount = rng.uniform() < 0.3 ? cap : cap * rng.uniform();
      }
      w[i] += amount;
      remaining -= amount;
    }
    if (remaining > 1e-9) continue;
    if (c.check(w, 1e-9).feasible) return Design(space, std::move(w));
  }
  return std::nullopt;
}

SymMatrix random_pd(Rng& rng, Eigen::Index p) {
  Matrix g(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) g(i, j) = rng.uniform(-1.0, 1.0);
  }
  return SymMatrix::symmetrized(g * g.transpose() + 0.1 * Matrix::Identity(p, p));
}

SymMatrix random_nnd(Rng& rng, Eigen::Index p, Eigen::Index rank) {
  Matrix g = Matrix::Zero(p, p);
  for (Eigen::Index k = 0; k < rank; ++k) {
    Vector v(p);
    for (Eigen::Index i = 0; i < p; ++i) v(i) = rng.uniform(-1.0, 1.0);
    g += v * v.transpose();
  }
  return SymMatrix::symmetrized(g);
}

CbrcProblem random_problem(Rng& rng, const RandomProblemShape& shape) {
  if (shape.d < static_cast<std::size_t>(shape.p)) throw DomainError("random_problem needs d >= p");
  std::vector<double> xs;
  for (std::size_t i = 0; i < shape.d; ++i) xs.push_back(static_cast<double>(i));
  const SpacePtr space = make_grid_space(xs);
  Matrix rows(static_cast<Eigen::Index>(shape.d), shape.p);
  for (int tries = 0;; ++tries) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = rng.uniform(-1.0, 1.0);
    }
    if (numerical_rank(SymMatrix::symmetrized(rows.transpose() * rows)) == shape.p) break;
    if (tries > 100) throw DomainError("random_problem: could not draw spanning regressors");
  }
  RegressionMap f(space, rows);
  std::vector<CbrcTerm> terms;
  for (std::size_t j = 0; j < shape.s; ++j) {
    const auto rank = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(shape.p) + 1));
    terms.push_back({random_nnd(rng, shape.p, rank), random_pd(rng, shape.p)});
  }
  LinearConstraintSet c(shape.d);
  if (shape.total) c.set_total_trials(Relation::Equal, *shape.total);
  c.set_integrality(shape.integral);
  return CbrcProblem(space, std::move(f), std::move(terms), std::move(c));
}

}  // namespace cbrc
