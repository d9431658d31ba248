#pragma once

// Second-order cone formulation of linearly constrained A-optimality on the
// artificial model, and an embedded interior-point solver for it.
//
// Standard form (primal):   minimize c^T x
//                           subject to A x = b,  G x + s = h,  s in K
// with K = R_+^l x Q^{q_1} x ... x Q^{q_N} (Q^q the second-order cone
// {s : s_0 >= ||s_{1:}||}).  Dual: maximize -b^T y - h^T z subject to
// A^T y + G^T z + c = 0, z in K.

#include <Eigen/Sparse>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbrc/design.hpp"
#include "cbrc/reduction.hpp"

namespace cbrc {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct ConeDims {
  Eigen::Index nonneg = 0;
  std::vector<Eigen::Index> soc;

  [[nodiscard]] Eigen::Index size() const;
  /// Barrier degree: l + number of second-order cones.
  [[nodiscard]] Eigen::Index degree() const { return nonneg + static_cast<Eigen::Index>(soc.size()); }
};

struct ConicProgram {
  Vector c;
  SparseMatrix a;
  Vector b;
  SparseMatrix g;
  Vector h;
  ConeDims cones;

  std::vector<std::string> variable_names;
  std::vector<std::string> equality_names;
  std::vector<std::string> inequality_names;  // one per row of g
  /// Variable holding w_x for each original design point.
  std::vector<Eigen::Index> weight_variable;

  [[nodiscard]] Eigen::Index num_variables() const { return c.size(); }
};

/// Builds the program whose optimum over design weights w is
/// min tr(M~(w)^{-1}) subject to the artificial problem's constraints, with the
/// coupling rows substituted out (one w per original point) and the auxiliary
/// weights substituted as the constant 1.
///
/// For each diagonal block j, each extended point x of block j with f~(x) != 0
/// and each coordinate k of block j there is a pair (t_{x,k}, h_{x,k}) with the
/// rotated cone h^2 <= t w_x, emitted as the standard cone (t+w, t-w, 2h).
/// The equalities sum_x f~_j(x) h_{x,k} = e_k make sum t the A-criterion.
ConicProgram build_a_opt_socp(const ArtificialProblem& ap);

/// Plain-text dump, one line per variable / row / cone. See docs/conic_dump.md.
void write_conic_program(const ConicProgram& cp, std::ostream& os);

enum class ConicStatus { Optimal, Infeasible, Unbounded, NumericalFailure };
std::string to_string(ConicStatus s);

struct ConicOptions {
  double tol = 1e-8;
  int max_iterations = 150;
  bool verbose = false;
};

struct ConicSolution {
  ConicStatus status = ConicStatus::NumericalFailure;
  Vector x, y, z, s;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;           // s^T z
  double relative_gap = 0.0;  // gap / max(|pobj|, |dobj|, tiny)
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
/// a Mehrotra predictor-corrector. Deterministic.
ConicSolution solve(const ConicProgram& cp, const ConicOptions& options);
ConicSolution solve(const ConicProgram& cp, double tol = 1e-8);

/// Design weights per original point from a solution of build_a_opt_socp.
std::vector<double> extract_weights(const ConicProgram& cp, const ConicSolution& sol);

struct ApproximateResult {
  ConicStatus status = ConicStatus::NumericalFailure;
  std::optional<Design> design;
  CriterionValue criterion = CriterionValue::infinite();
  double objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
};

/// Reduce, build, solve and map back: the optimal approximate design.
ApproximateResult solve_approximate(const CbrcProblem& problem, const ConicOptions& options = {});

}  // namespace cbrc
