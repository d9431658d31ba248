#pragma once

// Independent reference engines used to check the conic and branch-and-bound
// pipelines: brute-force enumeration, one-dimensional grid search and seeded
// random generators for property tests.

#include <cstdint>
#include <optional>
#include <utility>

#include "cbrc/design.hpp"

namespace cbrc {

/// SplitMix64 stream. Output is a fixed function of the seed on every platform:
///   state += 0x9E3779B97F4A7C15
///   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)
/// uniform() maps the top 53 bits to [0, 1).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

struct OracleResult {
  Design best;
  CriterionValue value;
};

/// Minimizes the criterion over every integer design with sum `total` that
/// satisfies the problem's constraints. Candidates are visited in increasing
/// lexicographic order and the first minimizer wins. Throws TooLargeError when
/// the number of compositions exceeds `max_candidates`, InfeasibleError when no
/// candidate is feasible with a finite value.
OracleResult enumerate_exact(const CbrcProblem& problem, int total, std::uint64_t max_candidates = 10'000'000);

/// Minimizes over w0 in {0, step, ..., total}, w1 = total - w0, on a two-point
/// space. Constraints other than the split are ignored.
OracleResult grid_search_2pt(const CbrcProblem& problem, double total, double step);

/// Seeded random design satisfying `constraints` (integral when the set is
/// flagged so), built by randomized greedy filling with restarts. nullopt when
/// the attempt budget runs out.
std::optional<Design> random_feasible(const SpacePtr& space, const LinearConstraintSet& constraints,
                                      std::uint64_t seed, int attempts = 200);

/// Random symmetric positive definite p x p matrix (G G^T + 0.1 I).
SymMatrix random_pd(Rng& rng, Eigen::Index p);
/// Random nonnegative definite p x p matrix of the given rank.
SymMatrix random_nnd(Rng& rng, Eigen::Index p, Eigen::Index rank);

struct RandomProblemShape {
  Eigen::Index p = 2;
  std::size_t s = 1;
  std::size_t d = 4;
  std::optional<double> total;  // fixed total trials when set
  bool integral = false;
};

/// Random CBRC problem: f rows uniform in [-1, 1] (resampled until they span
/// R^p), B_j of random rank 0..p, H_j random PD.
CbrcProblem random_problem(Rng& rng, const RandomProblemShape& shape);

}  // namespace cbrc
