#include "cbrc/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbrc {

std::string to_string(BnbStatus s) {
  switch (s) {
    case BnbStatus::Optimal: return "optimal";
    case BnbStatus::GapLimit: return "gap-limit";
    case BnbStatus::NodeLimit: return "node-limit";
    case BnbStatus::Infeasible: return "infeasible";
    case BnbStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

constexpr double kTieTol = 1e-9;

LinearConstraintSet with_box(const LinearConstraintSet& base, const std::vector<double>& lower,
                             const std::vector<double>& upper) {
  LinearConstraintSet c = base;
  for (std::size_t i = 0; i < lower.size(); ++i) c.set_bounds(i, lower[i], upper[i]);
  c.set_integrality(false);
  return c;
}

bool bounded_region(const LinearConstraintSet& c) {
  if (c.total_trials() && c.total_trials()->relation != Relation::GreaterEqual) return true;
  return std::all_of(c.upper().begin(), c.upper().end(), [](double u) { return std::isfinite(u); });
}

// Row activity change from adding one trial at point i keeps every one-sided
// row that can be violated by increases satisfied.
bool can_add(const LinearConstraintSet& c, const std::vector<double>& w, std::size_t i) {
  if (w[i] + 1.0 > c.upper()[i] + 1e-9) return false;
  for (const auto& row : c.rows()) {
    const double a = row.coefficients[i];
    if (a == 0.0) continue;
    double lhs = a;
    for (std::size_t k = 0; k < w.size(); ++k) lhs += row.coefficients[k] * w[k];
    if (row.relation == Relation::LessEqual && a > 0.0 && lhs > row.rhs + 1e-9) return false;
    if (row.relation == Relation::GreaterEqual && a < 0.0 && lhs < row.rhs - 1e-9) return false;
  }
  return true;
}

}  // namespace

NodeRelaxation solve_node_relaxation(const CbrcProblem& problem, const std::vector<double>& lower,
                                     const std::vector<double>& upper, const ConicOptions& options) {
  const CbrcProblem boxed = problem.with_constraints(with_box(problem.constraints(), lower, upper));
  const ArtificialProblem ap = build_artificial(boxed);
  const ConicProgram cp = build_a_opt_socp(ap);
  const ConicSolution sol = solve(cp, options);
  NodeRelaxation out;
  out.status = sol.status;
  if (sol.status == ConicStatus::Optimal || sol.status == ConicStatus::NumericalFailure) {
    out.bound = sol.dual_objective;
    out.weights = extract_weights(cp, sol);
  }
  return out;
}

std::optional<Design> round_incumbent(const CbrcProblem& problem, const Design& relaxed) {
  const LinearConstraintSet& c = problem.constraints();
  const std::size_t d = relaxed.size();
  std::vector<double> w(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double lo = std::ceil(c.lower()[i] - 1e-9);
    const double hi = std::floor(c.upper()[i] + 1e-9);
    w[i] = std::clamp(std::floor(relaxed[i] + 1e-9), lo, hi);
  }
  const double relaxed_total = std::round(relaxed.total());
  double target = relaxed_total;
  if (const auto& tt = c.total_trials()) {
    switch (tt->relation) {
      case Relation::Equal: target = std::round(tt->value); break;
      case Relation::LessEqual: target = std::min(std::floor(tt->value + 1e-9), relaxed_total); break;
      case Relation::GreaterEqual: target = std::max(std::ceil(tt->value - 1e-9), relaxed_total); break;
    }
  }
  double current = 0.0;
  for (double v : w) current += v;
  const long missing = std::lround(target - current);
  if (missing < 0) return std::nullopt;

  for (long step = 0; step < missing; ++step) {
    std::optional<std::size_t> best;
    CriterionValue best_value = CriterionValue::infinite();
    double best_frac = -1.0;
    for (int pass = 0; pass < 2 && !best; ++pass) {
      for (std::size_t i = 0; i < d; ++i) {
        const double frac = relaxed[i] - w[i];
        if (pass == 0 && frac <= 1e-9) continue;
        if (!can_add(c, w, i)) continue;
        w[i] += 1.0;
        const CriterionValue v = cbrc_value(problem, w);
        w[i] -= 1.0;
        const bool better = !best || v.less_than(best_value) ||
                            (!v.is_finite() && !best_value.is_finite() && frac > best_frac);
        if (better) {
          best = i;
          best_value = v;
          best_frac = frac;
        }
      }
    }
    if (!best) return std::nullopt;
    w[*best] += 1.0;
  }
  LinearConstraintSet check = c;
  check.set_integrality(true);
  if (!check.check(w, 1e-9).feasible) return std::nullopt;
  return Design(problem.space(), std::move(w));
}

BnbResult solve_exact(const CbrcProblem& problem, const BnbOptions& options) {
  const LinearConstraintSet& base = problem.constraints();
  if (!bounded_region(base)) {
    throw DomainError("exact design needs a bounded region: fix or bound total trials, or bound every point");
  }
  const std::size_t d = problem.space()->size();
  LinearConstraintSet integral = base;
  integral.set_integrality(true);

  BnbResult res;
  std::vector<double> incumbent_w;
  bool have_incumbent = false;
  std::vector<std::vector<double>> tie_designs;

  auto prune_level = [&]() {
    return res.incumbent_value - options.gap_tol * std::max(1.0, std::abs(res.incumbent_value));
  };
  auto consider = [&](const std::vector<double>& w) {
    if (!integral.check(w, 1e-9).feasible) return;
    const CriterionValue v = cbrc_value(problem, w);
    if (!v.is_finite()) return;
    if (!have_incumbent || v.value() < res.incumbent_value - kTieTol * std::max(1.0, std::abs(res.incumbent_value))) {
      have_incumbent = true;
      incumbent_w = w;
      res.incumbent_value = v.value();
      res.incumbent_history.push_back(v.value());
      tie_designs.clear();
      return;
    }
    if (std::abs(v.value() - res.incumbent_value) <= kTieTol * std::max(1.0, std::abs(res.incumbent_value)) &&
        w != incumbent_w && std::find(tie_designs.begin(), tie_designs.end(), w) == tie_designs.end()) {
      tie_designs.push_back(w);
    }
  };

  BnbNode root;
  root.lower.resize(d);
  root.upper.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    root.lower[i] = std::ceil(base.lower()[i] - options.integrality_tol);
    root.upper[i] = std::isfinite(base.upper()[i]) ? std::floor(base.upper()[i] + options.integrality_tol)
                                                   : std::numeric_limits<double>::infinity();
    if (root.lower[i] > root.upper[i]) {
      res.status = BnbStatus::Infeasible;
      return res;
    }
  }
  root.bound = -std::numeric_limits<double>::infinity();

  std::vector<BnbNode> open{root};
  long next_id = 1;
  double closed_bound = std::numeric_limits<double>::infinity();  // min bound over fathomed-by-bound nodes
  bool numerical_trouble = false;
  bool root_done = false;

  auto open_bound = [&]() {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& n : open) b = std::min(b, n.bound);
    return b;
  };
  // Largest global lower bound seen so far; any snapshot of
  // min(open, in-hand, closed, incumbent) is valid, so the running max is too.
  double global_bound = -std::numeric_limits<double>::infinity();
  auto update_bound = [&](double in_hand) {
    double b = std::min({open_bound(), in_hand, closed_bound});
    if (have_incumbent) b = std::min(b, res.incumbent_value);
    global_bound = std::max(global_bound, b);
  };
  auto report = [&]() {
    if (!options.progress) return;
    BnbProgress pr;
    pr.nodes = res.nodes;
    pr.open = static_cast<long>(open.size());
    pr.best_bound = global_bound;
    if (have_incumbent) {
      pr.incumbent = res.incumbent_value;
      pr.gap = (res.incumbent_value - pr.best_bound) / std::max(1.0, std::abs(res.incumbent_value));
    }
    options.progress(pr);
  };

  bool hit_limit = false;
  while (!open.empty()) {
    if (res.nodes >= options.node_limit) {
      hit_limit = true;
      break;
    }
    // Depth-first until an incumbent exists, then best bound (ties: oldest).
    std::size_t pick = open.size() - 1;
    if (have_incumbent) {
      for (std::size_t k = 0; k < open.size(); ++k) {
        if (open[k].bound < open[pick].bound || (open[k].bound == open[pick].bound && open[k].id < open[pick].id)) {
          pick = k;
        }
      }
    }
    BnbNode node = std::move(open[pick]);
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(pick));

    if (have_incumbent && node.bound >= prune_level()) {
      closed_bound = std::min(closed_bound, node.bound);
      continue;
    }
    ++res.nodes;
    update_bound(node.bound);
    if (options.progress && options.log_interval > 0 && res.nodes % options.log_interval == 0) report();

    const NodeRelaxation rel = solve_node_relaxation(problem, node.lower, node.upper, options.conic);
    if (rel.status == ConicStatus::Infeasible) {
      if (!root_done) {
        res.status = BnbStatus::Infeasible;
        return res;
      }
      continue;
    }
    root_done = true;
    double bound = node.bound;
    if (rel.status == ConicStatus::Optimal) {
      bound = std::max(bound, rel.bound);
    } else {
      numerical_trouble = true;
      if (rel.weights.empty()) {
        closed_bound = std::min(closed_bound, node.bound);  // region left unexplored; keep its inherited bound
        continue;
      }
    }

    if (have_incumbent && bound >= prune_level()) {
      closed_bound = std::min(closed_bound, bound);
      continue;
    }

    std::vector<double> rounded(d);
    bool integral_relaxation = true;
    std::optional<std::size_t> branch;
    double branch_frac = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = rel.weights[i];
      rounded[i] = std::round(v);
      const double dist = std::abs(v - rounded[i]);
      if (dist > options.integrality_tol) {
        integral_relaxation = false;
        if (dist > branch_frac) {
          branch_frac = dist;
          branch = i;
        }
      }
    }
    if (integral_relaxation) {
      consider(rounded);
      closed_bound = std::min(closed_bound, bound);
      continue;
    }
    {
      LinearConstraintSet boxed = with_box(base, node.lower, node.upper);
      const CbrcProblem node_problem = problem.with_constraints(std::move(boxed));
      if (auto r = round_incumbent(node_problem, Design(problem.space(), rel.weights))) consider(r->weights());
    }
    if (have_incumbent && bound >= prune_level()) {
      closed_bound = std::min(closed_bound, bound);
      continue;
    }

    const std::size_t i = *branch;
    const double v = rel.weights[i];
    BnbNode down = node;
    down.upper[i] = std::floor(v);
    down.bound = bound;
    down.depth = node.depth + 1;
    BnbNode up = node;
    up.lower[i] = std::ceil(v);
    up.bound = bound;
    up.depth = node.depth + 1;
    const bool prefer_up = v - std::floor(v) >= 0.5;
    // The preferred child is pushed last so depth-first search takes it first.
    BnbNode& first = prefer_up ? down : up;
    BnbNode& second = prefer_up ? up : down;
    for (BnbNode* child : {&first, &second}) {
      if (child->lower[i] > child->upper[i]) continue;
      child->id = next_id++;
      open.push_back(std::move(*child));
    }
  }

  if (have_incumbent) {
    res.incumbent = Design(problem.space(), incumbent_w);
    res.ties = static_cast<long>(tie_designs.size());
    update_bound(std::numeric_limits<double>::infinity());
    const double b = global_bound;
    res.best_bound = b;
    res.relative_gap = (res.incumbent_value - b) / std::max(1.0, std::abs(res.incumbent_value));
    if (hit_limit) res.status = BnbStatus::NodeLimit;
    else if (res.relative_gap <= options.gap_tol) res.status = BnbStatus::Optimal;
    else res.status = BnbStatus::GapLimit;
  } else {
    update_bound(std::numeric_limits<double>::infinity());
    res.best_bound = global_bound;
    if (hit_limit) res.status = BnbStatus::NodeLimit;
    else res.status = numerical_trouble ? BnbStatus::NumericalFailure : BnbStatus::Infeasible;
  }
  report();
  return res;
}

}  // namespace cbrc
