// Python module cbrc_design._core. Problems are opaque handles; designs go in
// and out as plain lists of weights in design-space order.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <sstream>

#include "cbrc/config.hpp"
#include "cbrc/conic.hpp"
#include "cbrc/exact.hpp"
#include "cbrc/oracle.hpp"
#include "cbrc/rcr.hpp"
#include "cbrc/reduction.hpp"

namespace py = pybind11;
using namespace cbrc;

namespace {

struct Problem {
  std::shared_ptr<const CbrcProblem> p;
};

Problem wrap(CbrcProblem prob) { return {std::make_shared<const CbrcProblem>(std::move(prob))}; }

double as_float(const CriterionValue& v) { return v.is_finite() ? v.value() : std::numeric_limits<double>::infinity(); }

Relation relation(const std::string& s) { return relation_from_string(s); }

Problem make_problem(const Matrix& f, const std::vector<std::pair<Matrix, Matrix>>& terms,
                     std::optional<std::vector<std::string>> labels, std::optional<double> total_trials,
                     const std::vector<std::tuple<std::vector<double>, std::string, double>>& rows,
                     std::optional<std::vector<double>> lower, std::optional<std::vector<double>> upper,
                     bool integral) {
  const auto d = static_cast<std::size_t>(f.rows());
  std::vector<DesignPoint> pts;
  for (std::size_t i = 0; i < d; ++i) {
    pts.push_back({labels ? labels->at(i) : std::to_string(i), {static_cast<double>(i)}});
  }
  if (labels && labels->size() != d) throw DomainError("need one label per row of f");
  auto space = std::make_shared<const DesignSpace>(std::move(pts));
  std::vector<CbrcTerm> t;
  for (const auto& [b, h] : terms) t.push_back({SymMatrix(b), SymMatrix(h)});
  LinearConstraintSet c(d);
  if (total_trials) c.set_total_trials(Relation::Equal, *total_trials);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& [coef, rel, rhs] = rows[r];
    c.add_row({coef, relation(rel), rhs, "row" + std::to_string(r)});
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double lo = lower ? lower->at(i) : 0.0;
    const double hi = upper ? upper->at(i) : std::numeric_limits<double>::infinity();
    if (lo != 0.0 || hi != std::numeric_limits<double>::infinity()) c.set_bounds(i, lo, hi);
  }
  c.set_integrality(integral);
  return wrap(CbrcProblem(space, RegressionMap(space, f), std::move(t), std::move(c)));
}

py::dict approximate(const Problem& pr, double tol) {
  ConicOptions o;
  o.tol = tol;
  ApproximateResult r;
  {
    py::gil_scoped_release release;
    r = solve_approximate(*pr.p, o);
  }
  py::dict out;
  out["status"] = to_string(r.status);
  out["weights"] = r.design ? py::cast(r.design->weights()) : py::none();
  out["criterion"] = r.design ? py::cast(as_float(r.criterion)) : py::none();
  out["objective"] = r.objective;
  out["dual_objective"] = r.dual_objective;
  out["relative_gap"] = r.relative_gap;
  out["iterations"] = r.iterations;
  return out;
}

py::dict exact(const Problem& pr, double gap_tol, long node_limit) {
  BnbOptions o;
  o.gap_tol = gap_tol;
  o.node_limit = node_limit;
  BnbResult r;
  {
    py::gil_scoped_release release;
    r = solve_exact(*pr.p, o);
  }
  py::dict out;
  out["status"] = to_string(r.status);
  out["weights"] = r.incumbent ? py::cast(r.incumbent->weights()) : py::none();
  out["criterion"] = r.incumbent ? py::cast(r.incumbent_value) : py::none();
  out["best_bound"] = r.best_bound;
  out["relative_gap"] = r.relative_gap;
  out["nodes"] = r.nodes;
  out["ties"] = r.ties;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Optimal designs under the compound Bayes risk criterion";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);
  py::register_exception<TooLargeError>(m, "TooLargeError", PyExc_RuntimeError);
  py::register_exception<SingularError>(m, "SingularError", PyExc_ArithmeticError);

  py::class_<Problem>(m, "Problem")
      .def_property_readonly("labels",
                             [](const Problem& pr) {
                               std::vector<std::string> out;
                               for (const auto& pt : pr.p->space()->points()) out.push_back(pt.label);
                               return out;
                             })
      .def_property_readonly("p", [](const Problem& pr) { return pr.p->p(); })
      .def_property_readonly("s", [](const Problem& pr) { return pr.p->s(); })
      .def_property_readonly("num_points", [](const Problem& pr) { return pr.p->space()->size(); })
      .def_property_readonly("f", [](const Problem& pr) { return pr.p->f().rows(); })
      .def("__repr__", [](const Problem& pr) {
        std::ostringstream os;
        os << "<Problem points=" << pr.p->space()->size() << " p=" << pr.p->p() << " s=" << pr.p->s() << ">";
        return os.str();
      });

  m.def("paper_example", [](double rho, bool triple_rows) { return wrap(paper_example(rho, triple_rows)); },
        py::arg("rho"), py::arg("triple_rows") = false,
        "Straight line on {k/50}, n=100, m=10, IMSE criterion with slope variance rho/(1-rho).");
  m.def("make_problem", &make_problem, py::arg("f"), py::arg("terms"), py::arg("labels") = py::none(),
        py::arg("total_trials") = py::none(), py::arg("rows") = std::vector<std::tuple<std::vector<double>, std::string, double>>{},
        py::arg("lower") = py::none(), py::arg("upper") = py::none(), py::arg("integral") = false,
        "Problem from regression rows f (d x p) and (B, H) pairs; rows are (coefficients, relation, rhs).");
  m.def("parse_config", [](const std::string& text) { return Problem{parse_config(text).problem}; }, py::arg("text"));
  m.def("load_config", [](const std::string& path) { return Problem{load_config(path).problem}; }, py::arg("path"));

  m.def("information_matrix", [](const Problem& pr, const std::vector<double>& w) {
    return information_matrix(w, pr.p->f()).mat();
  }, py::arg("problem"), py::arg("weights"));
  m.def("cbrc_value", [](const Problem& pr, const std::vector<double>& w) { return as_float(cbrc_value(*pr.p, w)); },
        py::arg("problem"), py::arg("weights"), "Criterion value; inf when some M + B_j is singular.");
  m.def("cbrc_terms", [](const Problem& pr, const std::vector<double>& w) {
    std::vector<double> out;
    for (const auto& t : cbrc_terms(*pr.p, w)) out.push_back(as_float(t));
    return out;
  }, py::arg("problem"), py::arg("weights"));
  m.def("is_feasible", [](const Problem& pr, const std::vector<double>& w) {
    return pr.p->constraints().check(w).feasible;
  }, py::arg("problem"), py::arg("weights"));

  m.def("build_artificial", [](const Problem& pr) {
    const ArtificialProblem ap = build_artificial(pr.p);
    py::dict out;
    std::vector<std::string> labels;
    for (const auto& pt : ap.extended_points()) labels.push_back(pt.label);
    out["labels"] = labels;
    out["f_tilde"] = ap.f_tilde();
    out["ranks"] = ap.ranks();
    out["num_coupling_rows"] = ap.num_coupling_rows();
    return out;
  }, py::arg("problem"), "Extended points, their regression vectors and the coupling row count.");
  m.def("artificial_a_criterion", [](const Problem& pr, const std::vector<double>& w) {
    const ArtificialProblem ap = build_artificial(pr.p);
    return as_float(a_criterion(ap, lift_design(ap, Design(pr.p->space(), w))));
  }, py::arg("problem"), py::arg("weights"), "A-criterion of the lifted design on the artificial model.");
  m.def("conic_program_text", [](const Problem& pr) {
    std::ostringstream os;
    write_conic_program(build_a_opt_socp(build_artificial(pr.p)), os);
    return os.str();
  }, py::arg("problem"));

  m.def("solve_approximate", &approximate, py::arg("problem"), py::arg("tol") = 1e-8);
  m.def("solve_exact", &exact, py::arg("problem"), py::arg("gap_tol") = 1e-6, py::arg("node_limit") = 100000);
  m.def("enumerate_exact", [](const Problem& pr, int total) {
    const OracleResult r = enumerate_exact(*pr.p, total);
    return py::make_tuple(r.best.weights(), as_float(r.value));
  }, py::arg("problem"), py::arg("total"), "Brute-force exact optimum (weights, value).");
}
