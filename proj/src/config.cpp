#include "cbrc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cbrc/rcr.hpp"
#include "json.hpp"

namespace cbrc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "expected a finite number");
  return x;
}

int integer(const json& v, const std::string& path) {
  const double x = number(v, path);
  if (x != std::floor(x)) fail(path, "expected an integer");
  return static_cast<int>(x);
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty row-major list of rows");
  const std::size_t rows = v.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = number_list(v[i], path + "[" + std::to_string(i) + "]");
    if (i == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    }
    if (row.size() != cols || cols == 0) fail(path, "rows have unequal or zero length");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

SymMatrix sym(const json& v, const std::string& path, Eigen::Index p) {
  const Matrix m = matrix(v, path);
  if (m.rows() != p || m.cols() != p) fail(path, "expected a " + std::to_string(p) + "x" + std::to_string(p) + " matrix");
  try {
    return SymMatrix(m, 1e-10);
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

SpacePtr parse_space(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a nonempty list of design points");
  std::vector<DesignPoint> pts;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& label = field(v[i], "label", p);
    if (!label.is_string()) fail(p + ".label", "expected a string");
    pts.push_back({label.get<std::string>(), number_list(field(v[i], "coordinate", p), p + ".coordinate")});
  }
  try {
    return std::make_shared<const DesignSpace>(std::move(pts));
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
}

std::shared_ptr<const RegressionMap> parse_regression(const json& v, const SpacePtr& space, const std::string& path) {
  const json& type = field(v, "type", path);
  try {
    if (type == "explicit") {
      return std::make_shared<const RegressionMap>(space, matrix(field(v, "f", path), path + ".f"));
    }
    if (type == "polynomial") {
      return std::make_shared<const RegressionMap>(
          RegressionMap::polynomial(space, integer(field(v, "degree", path), path + ".degree")));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
  fail(path + ".type", "expected \"explicit\" or \"polynomial\"");
}

LinearConstraintSet parse_constraints(const json& v, std::size_t d, const std::string& path) {
  LinearConstraintSet c(d);
  if (v.is_null()) return c;
  if (!v.is_object()) fail(path, "expected an object");
  try {
    if (auto it = v.find("rows"); it != v.end()) {
      if (!it->is_array()) fail(path + ".rows", "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string p = path + ".rows[" + std::to_string(i) + "]";
        const json& r = (*it)[i];
        ConstraintRow row;
        row.coefficients = number_list(field(r, "coefficients", p), p + ".coefficients");
        if (row.coefficients.size() != d) fail(p + ".coefficients", "expected " + std::to_string(d) + " entries");
        const json& rel = field(r, "relation", p);
        if (!rel.is_string()) fail(p + ".relation", "expected \"<=\", \"=\" or \">=\"");
        row.relation = relation_from_string(rel.get<std::string>());
        row.rhs = number(field(r, "rhs", p), p + ".rhs");
        if (auto n = r.find("name"); n != r.end() && n->is_string()) row.name = n->get<std::string>();
        c.add_row(std::move(row));
      }
    }
    if (auto it = v.find("total_trials"); it != v.end() && !it->is_null()) {
      const std::string p = path + ".total_trials";
      if (it->is_number()) {
        c.set_total_trials(Relation::Equal, number(*it, p));
      } else {
        const json& rel = field(*it, "relation", p);
        if (!rel.is_string()) fail(p + ".relation", "expected a relation string");
        c.set_total_trials(relation_from_string(rel.get<std::string>()), number(field(*it, "value", p), p + ".value"));
      }
    }
    if (auto it = v.find("bounds"); it != v.end() && !it->is_null()) {
      const std::string p = path + ".bounds";
      std::vector<double> lo(d, 0.0);
      std::vector<double> hi(d, std::numeric_limits<double>::infinity());
      if (auto l = it->find("lower"); l != it->end()) lo = number_list(*l, p + ".lower");
      if (auto u = it->find("upper"); u != it->end()) {
        if (!u->is_array()) fail(p + ".upper", "expected an array");
        for (std::size_t i = 0; i < u->size() && i < d; ++i) {
          if (!(*u)[i].is_null()) hi[i] = number((*u)[i], p + ".upper[" + std::to_string(i) + "]");
        }
        if (u->size() != d) fail(p + ".upper", "expected " + std::to_string(d) + " entries");
      }
      if (lo.size() != d) fail(p + ".lower", "expected " + std::to_string(d) + " entries");
      for (std::size_t i = 0; i < d; ++i) c.set_bounds(i, lo[i], hi[i]);
    }
    if (auto it = v.find("integrality"); it != v.end()) {
      if (!it->is_boolean()) fail(path + ".integrality", "expected true or false");
      c.set_integrality(it->get<bool>());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    fail(path, e.what());
  }
  return c;
}

// Copies rows, total trials and bounds of `extra` onto `into`.
void merge_constraints(LinearConstraintSet& into, const LinearConstraintSet& extra) {
  for (const auto& r : extra.rows()) into.add_row(r);
  if (extra.total_trials()) into.set_total_trials(extra.total_trials()->relation, extra.total_trials()->value);
  for (std::size_t i = 0; i < extra.num_points(); ++i) {
    if (extra.lower()[i] != 0.0 || std::isfinite(extra.upper()[i])) into.set_bounds(i, extra.lower()[i], extra.upper()[i]);
  }
  if (extra.integrality()) into.set_integrality(true);
}

ProblemConfig parse_document(const json& doc, std::optional<double> rho) {
  if (!doc.is_object()) fail("$", "expected a JSON object");
  const json& crit = field(doc, "criterion", "$");
  const json& type = field(crit, "type", "$.criterion");
  if (!type.is_string()) fail("$.criterion.type", "expected a string");
  const std::string kind = type.get<std::string>();
  const json empty;
  const json& cons_json = doc.contains("constraints") ? doc["constraints"] : empty;

  ProblemConfig out;
  if (kind == "paper_example") {
    out.family = CriterionFamily::PaperExample;
    const double r = rho ? *rho : number(field(crit, "rho", "$.criterion"), "$.criterion.rho");
    bool triple = false;
    if (auto it = crit.find("with_constraint10"); it != crit.end()) {
      if (!it->is_boolean()) fail("$.criterion.with_constraint10", "expected true or false");
      triple = it->get<bool>();
    }
    try {
      CbrcProblem prob = paper_example(r, triple);
      LinearConstraintSet c = prob.constraints();
      merge_constraints(c, parse_constraints(cons_json, prob.space()->size(), "$.constraints"));
      out.problem = std::make_shared<const CbrcProblem>(prob.with_constraints(std::move(c)));
    } catch (const ConfigError&) {
      throw;
    } catch (const DomainError& e) {
      fail("$.criterion", e.what());
    }
    return out;
  }

  const SpacePtr space = parse_space(field(doc, "design_space", "$"), "$.design_space");
  const auto f = parse_regression(field(doc, "regression", "$"), space, "$.regression");
  const Eigen::Index p = f->dim();
  LinearConstraintSet extra = parse_constraints(cons_json, space->size(), "$.constraints");

  try {
    if (kind == "cbrc") {
      out.family = CriterionFamily::Cbrc;
      const json& terms = field(crit, "terms", "$.criterion");
      if (!terms.is_array() || terms.empty()) fail("$.criterion.terms", "expected a nonempty array");
      std::vector<CbrcTerm> parsed;
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const std::string pth = "$.criterion.terms[" + std::to_string(j) + "]";
        SymMatrix b = sym(field(terms[j], "B", pth), pth + ".B", p);
        SymMatrix h = sym(field(terms[j], "H", pth), pth + ".H", p);
        const Vector eb = sym_eig(b).values;
        if (eb(p - 1) < -1e-10 * std::max(1.0, eb(0))) fail(pth + ".B", "not nonnegative definite");
        try {
          (void)cholesky(h);
        } catch (const SingularError&) {
          fail(pth + ".H", "not positive definite");
        }
        if (auto w = terms[j].find("weight"); w != terms[j].end()) {
          const double wt = number(*w, pth + ".weight");
          if (!(wt > 0.0)) fail(pth + ".weight", "must be > 0");
          h = wt * h;
        }
        parsed.push_back({std::move(b), std::move(h)});
      }
      out.problem = std::make_shared<const CbrcProblem>(space, *f, std::move(parsed), std::move(extra));
      return out;
    }
    if (kind == "rcr_linear" || kind == "rcr_imse") {
      RcrSpec spec;
      spec.space = space;
      spec.f = f;
      spec.n = integer(field(crit, "n", "$.criterion"), "$.criterion.n");
      spec.m = integer(field(crit, "m", "$.criterion"), "$.criterion.m");
      Matrix dmat = sym(field(crit, "D", "$.criterion"), "$.criterion.D", p).mat();
      if (rho) {
        Eigen::Index idx = p - 1;
        if (auto it = crit.find("sweep_index"); it != crit.end()) idx = integer(*it, "$.criterion.sweep_index");
        if (idx < 0 || idx >= p) fail("$.criterion.sweep_index", "out of range");
        dmat(idx, idx) = slope_variance_from_rho(*rho);
      }
      spec.d = SymMatrix(dmat);
      if (kind == "rcr_linear") {
        out.family = CriterionFamily::RcrLinear;
        spec.criterion = LinearCriterion{sym(field(crit, "A", "$.criterion"), "$.criterion.A", p)};
      } else {
        out.family = CriterionFamily::RcrImse;
        const json& nu = field(crit, "nu", "$.criterion");
        std::vector<double> weights;
        if (nu.is_string() && nu == "uniform") {
          weights.assign(space->size(), 1.0 / static_cast<double>(space->size()));
        } else {
          weights = number_list(nu, "$.criterion.nu");
        }
        spec.criterion = ImseCriterion{std::move(weights)};
      }
      CbrcProblem prob = rcr_problem(spec);
      LinearConstraintSet c = prob.constraints();
      merge_constraints(c, extra);
      out.problem = std::make_shared<const CbrcProblem>(prob.with_constraints(std::move(c)));
      return out;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    fail("$.criterion", e.what());
  }
  fail("$.criterion.type", "unknown criterion type '" + kind + "'");
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProblemConfig parse_config(const std::string& text, std::optional<double> rho) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
  ProblemConfig cfg = parse_document(doc, rho);
  cfg.text = text;
  return cfg;
}

ProblemConfig load_config(const std::string& path, std::optional<double> rho) {
  return parse_config(read_file(path), rho);
}

ProblemConfig with_rho(const ProblemConfig& cfg, double rho) {
  if (cfg.family == CriterionFamily::Cbrc) {
    throw ConfigError("$.criterion.type: criterion type 'cbrc' has no rho parameter to sweep");
  }
  return parse_config(cfg.text, rho);
}

std::vector<double> parse_design(const std::string& text, const DesignSpace& space) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) fail("$", "expected a JSON object");
  if (auto it = doc.find("design"); it != doc.end()) {
    if (!it->is_array()) fail("$.design", "expected an array");
    std::vector<double> w(space.size(), 0.0);
    std::vector<bool> seen(space.size(), false);
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = "$.design[" + std::to_string(i) + "]";
      const json& label = field((*it)[i], "label", p);
      if (!label.is_string()) fail(p + ".label", "expected a string");
      const auto idx = space.index_of(label.get<std::string>());
      if (!idx) fail(p + ".label", "'" + label.get<std::string>() + "' is not a point of the design space");
      if (seen[*idx]) fail(p + ".label", "duplicate label");
      seen[*idx] = true;
      w[*idx] = number(field((*it)[i], "weight", p), p + ".weight");
    }
    return w;
  }
  if (auto it = doc.find("weights"); it != doc.end()) {
    auto w = number_list(*it, "$.weights");
    if (w.size() != space.size()) {
      fail("$.weights", "has " + std::to_string(w.size()) + " entries, design space has " + std::to_string(space.size()));
    }
    return w;
  }
  fail("$", "expected a \"design\" or \"weights\" field");
}

std::vector<double> load_design(const std::string& path, const DesignSpace& space) {
  return parse_design(read_file(path), space);
}

}  // namespace cbrc
