#pragma once

// Branch-and-bound over the conic relaxation for optimal exact designs.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cbrc/conic.hpp"

namespace cbrc {

struct BnbNode {
  std::vector<double> lower;
  std::vector<double> upper;
  double bound = 0.0;  // relaxation lower bound inherited from the parent
  int depth = 0;
  long id = 0;
};

enum class BnbStatus { Optimal, GapLimit, NodeLimit, Infeasible, NumericalFailure };
std::string to_string(BnbStatus s);

struct BnbProgress {
  long nodes = 0;
  long open = 0;
  double best_bound = 0.0;
  std::optional<double> incumbent;
  double gap = 0.0;
};

struct BnbOptions {
  double gap_tol = 1e-6;
  long node_limit = 100000;
  double integrality_tol = 1e-6;
  ConicOptions conic;
  /// Called every `log_interval` nodes and once at the end; empty disables.
  std::function<void(const BnbProgress&)> progress;
  long log_interval = 100;
};

struct BnbResult {
  BnbStatus status = BnbStatus::Infeasible;
  std::optional<Design> incumbent;
  double incumbent_value = 0.0;
  double best_bound = 0.0;
  double relative_gap = 0.0;
  long nodes = 0;
  /// Integer designs found with a value equal (to 1e-9 relative) to the incumbent's.
  long ties = 0;
  /// Incumbent values in the order they were accepted.
  std::vector<double> incumbent_history;
};

/// Optimal exact design. The feasible region must be bounded (total trials
/// fixed or bounded above, or finite upper bounds on every point); otherwise
/// throws DomainError. The problem's integrality flag is implied.
BnbResult solve_exact(const CbrcProblem& problem, const BnbOptions& options = {});

/// Greedy rounding of a relaxed design: floor every weight, then add single
/// trials one at a time to the point that keeps all rows feasible and gives the
/// smallest criterion, until the total-trials requirement is met. Returns
/// nullopt when no integer-feasible design is reached.
std::optional<Design> round_incumbent(const CbrcProblem& problem, const Design& relaxed);

/// Lower bound of the conic relaxation restricted to the box [lower, upper];
/// nullopt when the box is infeasible. Exposed for bound-validity checks.
struct NodeRelaxation {
  ConicStatus status = ConicStatus::NumericalFailure;
  double bound = 0.0;
  std::vector<double> weights;
};
NodeRelaxation solve_node_relaxation(const CbrcProblem& problem, const std::vector<double>& lower,
                                     const std::vector<double>& upper, const ConicOptions& options = {});

}  // namespace cbrc
