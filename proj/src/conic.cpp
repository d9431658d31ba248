#include <cmath>
#include <cstdio>
#include <ostream>

#include "cbrc/conic.hpp"

namespace cbrc {

namespace {

using Triplet = Eigen::Triplet<double>;

struct RowBuilder {
  std::vector<Triplet> triplets;
  std::vector<double> rhs;
  std::vector<std::string> names;

  Eigen::Index add(std::string name, double value) {
    rhs.push_back(value);
    names.push_back(std::move(name));
    return static_cast<Eigen::Index>(rhs.size() - 1);
  }
  void coef(Eigen::Index row, Eigen::Index col, double v) {
    if (v != 0.0) triplets.emplace_back(row, col, v);
  }
};

}  // namespace

ConicProgram build_a_opt_socp(const ArtificialProblem& ap) {
  const std::size_t d = ap.num_original();
  const std::size_t s = ap.s();
  const Eigen::Index p = ap.p();
  const Matrix& ft = ap.f_tilde();
  const auto& pts = ap.extended_points();

  ConicProgram cp;
  std::vector<double> cost;
  auto new_var = [&](std::string name, double c) {
    cp.variable_names.push_back(std::move(name));
    cost.push_back(c);
    return static_cast<Eigen::Index>(cost.size() - 1);
  };
  for (std::size_t x = 0; x < d; ++x) {
    cp.weight_variable.push_back(new_var("w[" + ap.base().space()->point(x).label + "]", 0.0));
  }

  RowBuilder eq;
  RowBuilder lin;   // nonnegative-orthant rows: h - G x >= 0
  RowBuilder cone;  // second-order cone rows

  // Design-side rows. Coupling rows are substituted away: the coefficient of
  // w_x collects the coefficients of every copy (j, x); fixed auxiliary weights
  // move to the right-hand side.
  const LinearConstraintSet& lc = ap.constraints();
  for (std::size_t r = ap.num_coupling_rows(); r < lc.rows().size(); ++r) {
    const ConstraintRow& row = lc.rows()[r];
    std::vector<double> coef(d, 0.0);
    double rhs = row.rhs;
    for (std::size_t i = 0; i < row.coefficients.size(); ++i) {
      const double a = row.coefficients[i];
      if (a == 0.0) continue;
      const ExtendedPoint& ep = pts[i];
      if (ep.kind == ExtendedPoint::Kind::Copy) coef[ep.index] += a;
      else rhs -= a;  // weight fixed to 1
    }
    const double sign = row.relation == Relation::GreaterEqual ? -1.0 : 1.0;
    RowBuilder& target = row.relation == Relation::Equal ? eq : lin;
    const Eigen::Index ri = target.add(row.name, sign * rhs);
    for (std::size_t x = 0; x < d; ++x) target.coef(ri, cp.weight_variable[x], sign * coef[x]);
  }
  for (std::size_t x = 0; x < d; ++x) {
    const double lo = lc.lower()[x];
    const double hi = lc.upper()[x];
    const std::string& label = ap.base().space()->point(x).label;
    const Eigen::Index v = cp.weight_variable[x];
    if (lo == hi) {
      eq.coef(eq.add("fix[" + label + "]", lo), v, 1.0);
      continue;
    }
    lin.coef(lin.add("lower[" + label + "]", -lo), v, -1.0);
    if (std::isfinite(hi)) lin.coef(lin.add("upper[" + label + "]", hi), v, 1.0);
  }

  // Cones and the unit-vector equalities, block by block.
  for (std::size_t j = 0; j < s; ++j) {
    const Eigen::Index col0 = static_cast<Eigen::Index>(j) * p;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].block != j) continue;
      if (ft.row(static_cast<Eigen::Index>(i)).segment(col0, p).cwiseAbs().maxCoeff() == 0.0) continue;
      members.push_back(i);
    }
    for (Eigen::Index k = 0; k < p; ++k) {
      std::vector<Eigen::Index> hvars;
      hvars.reserve(members.size());
      for (std::size_t i : members) {
        const ExtendedPoint& ep = pts[i];
        const std::string tag = ep.label + "," + std::to_string(k + 1);
        const Eigen::Index t = new_var("t[" + tag + "]", 1.0);
        const Eigen::Index hv = new_var("h[" + tag + "]", 0.0);
        hvars.push_back(hv);
        const bool fixed = ep.kind == ExtendedPoint::Kind::Auxiliary;
        const Eigen::Index wv = fixed ? -1 : cp.weight_variable[ep.index];
        // s = (t + w, t - w, 2 h)
        const Eigen::Index r0 = cone.add("soc0[" + tag + "]", fixed ? 1.0 : 0.0);
        cone.coef(r0, t, -1.0);
        if (!fixed) cone.coef(r0, wv, -1.0);
        const Eigen::Index r1 = cone.add("soc1[" + tag + "]", fixed ? -1.0 : 0.0);
        cone.coef(r1, t, -1.0);
        if (!fixed) cone.coef(r1, wv, 1.0);
        const Eigen::Index r2 = cone.add("soc2[" + tag + "]", 0.0);
        cone.coef(r2, hv, -2.0);
        cp.cones.soc.push_back(3);
      }
      for (Eigen::Index r = 0; r < p; ++r) {
        const Eigen::Index row = eq.add("unit[" + std::to_string(j + 1) + "," + std::to_string(k + 1) + "," +
                                            std::to_string(r + 1) + "]",
                                        r == k ? 1.0 : 0.0);
        for (std::size_t m = 0; m < members.size(); ++m) {
          eq.coef(row, hvars[m], ft(static_cast<Eigen::Index>(members[m]), col0 + r));
        }
      }
    }
  }

  const Eigen::Index n = static_cast<Eigen::Index>(cost.size());
  cp.c = Eigen::Map<const Vector>(cost.data(), n);

  cp.a.resize(static_cast<Eigen::Index>(eq.rhs.size()), n);
  cp.a.setFromTriplets(eq.triplets.begin(), eq.triplets.end());
  cp.b = Eigen::Map<const Vector>(eq.rhs.data(), static_cast<Eigen::Index>(eq.rhs.size()));
  cp.equality_names = std::move(eq.names);

  const auto nl = static_cast<Eigen::Index>(lin.rhs.size());
  const auto nc = static_cast<Eigen::Index>(cone.rhs.size());
  std::vector<Triplet> gt = std::move(lin.triplets);
  for (const Triplet& t : cone.triplets) gt.emplace_back(t.row() + nl, t.col(), t.value());
  cp.g.resize(nl + nc, n);
  cp.g.setFromTriplets(gt.begin(), gt.end());
  cp.h.resize(nl + nc);
  for (Eigen::Index i = 0; i < nl; ++i) cp.h(i) = lin.rhs[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i < nc; ++i) cp.h(nl + i) = cone.rhs[static_cast<std::size_t>(i)];
  cp.inequality_names = std::move(lin.names);
  cp.inequality_names.insert(cp.inequality_names.end(), cone.names.begin(), cone.names.end());
  cp.cones.nonneg = nl;
  return cp;
}

namespace {

void write_row(std::ostream& os, const char* kind, Eigen::Index index, const std::string& name, double rhs,
               const SparseMatrix& rowmajor_src, Eigen::Index row) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", rhs);
  os << kind << ' ' << index << ' ' << name << " rhs " << buf << " :";
  Eigen::SparseMatrix<double, Eigen::RowMajor> rm = rowmajor_src.row(row);
  for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rm, 0); it; ++it) {
    std::snprintf(buf, sizeof buf, "%.17g", it.value());
    os << ' ' << it.col() << ':' << buf;
  }
  os << '\n';
}

}  // namespace

void write_conic_program(const ConicProgram& cp, std::ostream& os) {
  char buf[64];
  os << "conic-program 1\n";
  os << "sizes variables " << cp.c.size() << " equalities " << cp.a.rows() << " inequalities " << cp.g.rows()
     << " nonneg " << cp.cones.nonneg << " soc " << cp.cones.soc.size() << '\n';
  for (Eigen::Index i = 0; i < cp.c.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", cp.c(i));
    os << "var " << i << ' ' << cp.variable_names[static_cast<std::size_t>(i)] << " cost " << buf << '\n';
  }
  for (Eigen::Index r = 0; r < cp.a.rows(); ++r) {
    write_row(os, "eq", r, cp.equality_names[static_cast<std::size_t>(r)], cp.b(r), cp.a, r);
  }
  for (Eigen::Index r = 0; r < cp.g.rows(); ++r) {
    write_row(os, "ineq", r, cp.inequality_names[static_cast<std::size_t>(r)], cp.h(r), cp.g, r);
  }
  os << "cone nonneg 0 " << cp.cones.nonneg << '\n';
  Eigen::Index off = cp.cones.nonneg;
  for (Eigen::Index q : cp.cones.soc) {
    os << "cone soc " << off << ' ' << q << '\n';
    off += q;
  }
}

std::vector<double> extract_weights(const ConicProgram& cp, const ConicSolution& sol) {
  std::vector<double> w;
  w.reserve(cp.weight_variable.size());
  for (Eigen::Index v : cp.weight_variable) w.push_back(sol.x.size() ? std::max(0.0, sol.x(v)) : 0.0);
  return w;
}

ApproximateResult solve_approximate(const CbrcProblem& problem, const ConicOptions& options) {
  const ArtificialProblem ap = build_artificial(problem);
  const ConicProgram cp = build_a_opt_socp(ap);
  const ConicSolution sol = solve(cp, options);
  ApproximateResult res;
  res.status = sol.status;
  res.iterations = sol.iterations;
  res.objective = sol.primal_objective;
  res.dual_objective = sol.dual_objective;
  res.relative_gap = sol.relative_gap;
  if (sol.status == ConicStatus::Optimal) {
    Design xi(problem.space(), extract_weights(cp, sol));
    res.criterion = cbrc_value(problem, xi);
    res.design = std::move(xi);
  }
  return res;
}

}  // namespace cbrc
