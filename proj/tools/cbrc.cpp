// cbrc: optimal approximate and exact designs under the compound Bayes risk
// criterion.
//
//   cbrc solve    CONFIG --mode approximate|exact -o solution.json
//   cbrc sweep    CONFIG --start 0.001 --stop 0.2 --step 0.001 --mode exact -o sweep.csv
//   cbrc evaluate CONFIG DESIGN
//
// Exit codes: 0 optimal, 2 infeasible, 3 limit reached, 4 input error,
// 5 numerical failure. CBRC_LOG=0|1|2 sets stderr verbosity (default 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cbrc/config.hpp"
#include "cbrc/conic.hpp"
#include "cbrc/exact.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace cbrc;

enum Exit { kOk = 0, kInfeasible = 2, kLimit = 3, kInput = 4, kNumerical = 5 };

int log_level = 1;

void log(int level, const std::string& msg) {
  if (level <= log_level) std::cerr << msg << '\n';
}

struct Outcome {
  std::string status;
  int code = kNumerical;
  std::optional<std::vector<double>> weights;
  json extra = json::object();
};

struct SolveFlags {
  std::string mode = "approximate";
  double tol = 1e-8;
  double gap_tol = 1e-6;
  long node_limit = 100000;
  std::uint64_t seed = 0;
};

Outcome run(const CbrcProblem& problem, const SolveFlags& flags, const std::string& dump_path = {}) {
  Outcome out;
  ConicOptions conic;
  conic.tol = flags.tol;
  if (flags.mode == "approximate") {
    if (!dump_path.empty()) {
      std::ofstream os(dump_path);
      if (!os) throw ConfigError(dump_path + ": cannot open for writing");
      write_conic_program(build_a_opt_socp(build_artificial(problem)), os);
    }
    const ApproximateResult r = solve_approximate(problem, conic);
    out.status = to_string(r.status);
    out.extra["objective"] = r.objective;
    out.extra["dual_objective"] = r.dual_objective;
    out.extra["relative_gap"] = r.relative_gap;
    out.extra["iterations"] = r.iterations;
    switch (r.status) {
      case ConicStatus::Optimal: out.code = kOk; break;
      case ConicStatus::Infeasible: out.code = kInfeasible; break;
      default: out.code = kNumerical; break;
    }
    if (r.design) out.weights = r.design->weights();
    return out;
  }
  BnbOptions opt;
  opt.gap_tol = flags.gap_tol;
  opt.node_limit = flags.node_limit;
  opt.conic = conic;
  if (log_level >= 2) {
    opt.log_interval = 50;
    opt.progress = [](const BnbProgress& p) {
      std::ostringstream os;
      os << "bnb nodes " << p.nodes << " open " << p.open << " bound " << p.best_bound;
      if (p.incumbent) os << " incumbent " << *p.incumbent << " gap " << p.gap;
      log(2, os.str());
    };
  }
  const BnbResult r = solve_exact(problem, opt);
  out.status = to_string(r.status);
  out.extra["best_bound"] = r.best_bound;
  out.extra["relative_gap"] = r.relative_gap;
  out.extra["nodes"] = r.nodes;
  out.extra["ties"] = r.ties;
  switch (r.status) {
    case BnbStatus::Optimal: out.code = kOk; break;
    case BnbStatus::Infeasible: out.code = kInfeasible; break;
    case BnbStatus::NodeLimit:
    case BnbStatus::GapLimit: out.code = kLimit; break;
    case BnbStatus::NumericalFailure: out.code = kNumerical; break;
  }
  if (r.incumbent) out.weights = r.incumbent->weights();
  return out;
}

CbrcProblem with_mode(const CbrcProblem& p, const std::string& mode) {
  LinearConstraintSet c = p.constraints();
  c.set_integrality(mode == "exact");
  return p.with_constraints(std::move(c));
}

json criterion_json(const CriterionValue& v) {
  if (v.is_finite()) return v.value();
  return "+inf";
}

int cmd_solve(const std::string& config_path, const std::string& output, const std::string& dump,
              const SolveFlags& flags) {
  const ProblemConfig cfg = load_config(config_path);
  const CbrcProblem problem = with_mode(*cfg.problem, flags.mode);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o = run(problem, flags, dump);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json doc;
  doc["status"] = o.status;
  doc["mode"] = flags.mode;
  doc["solver"] = o.extra;
  doc["wall_time_s"] = wall;
  doc["seed"] = flags.seed;
  if (o.weights) {
    const auto terms = cbrc_terms(problem, *o.weights);
    const CriterionValue v = cbrc_value(problem, *o.weights);
    doc["criterion"] = criterion_json(v);
    json tj = json::array();
    for (const auto& t : terms) tj.push_back(criterion_json(t));
    doc["terms"] = tj;
    json dj = json::array();
    for (std::size_t i = 0; i < o.weights->size(); ++i) {
      dj.push_back({{"label", problem.space()->point(i).label}, {"weight", (*o.weights)[i]}});
    }
    doc["design"] = dj;
  } else {
    doc["criterion"] = nullptr;
  }
  std::ofstream os(output);
  if (!os) throw ConfigError(output + ": cannot open for writing");
  os << doc.dump(2) << '\n';
  log(1, "status " + o.status + (o.weights ? ", criterion " + cbrc_value(problem, *o.weights).to_string() : ""));
  return o.code;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_sweep(const std::string& config_path, double start, double stop, double step, const std::string& output,
              const SolveFlags& flags) {
  if (!(start > 0.0) || !(stop < 1.0) || !(start < stop) || !(step > 0.0)) {
    throw ConfigError("rho grid: need 0 < start < stop < 1 and step > 0");
  }
  const ProblemConfig base = load_config(config_path);
  if (base.family == CriterionFamily::Cbrc) throw ConfigError("$.criterion.type: 'cbrc' has no rho parameter to sweep");
  std::ofstream os(output);
  if (!os) throw ConfigError(output + ": cannot open for writing");
  const DesignSpace& space = *base.problem->space();
  os << "rho,status,criterion";
  for (const auto& pt : space.points()) os << ",w[" << pt.label << "]";
  os << '\n';
  const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  int worst = kOk;
  for (long k = 0; k < count; ++k) {
    const double rho = start + static_cast<double>(k) * step;
    os << fmt(rho);
    try {
      const CbrcProblem problem = with_mode(*with_rho(base, rho).problem, flags.mode);
      Outcome o = run(problem, flags);
      worst = std::max(worst, o.code);
      os << ',' << o.status << ',';
      if (o.weights) {
        os << cbrc_value(problem, *o.weights).to_string();
        for (double w : *o.weights) os << ',' << fmt(std::abs(w) < 1e-12 ? 0.0 : w);
      } else {
        for (std::size_t i = 0; i < space.size(); ++i) os << ',';
      }
      log(2, "rho " + fmt(rho) + " " + o.status);
    } catch (const std::exception& e) {
      worst = std::max(worst, static_cast<int>(kNumerical));
      std::string msg = e.what();
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      os << ",error: " << msg << ',';
      for (std::size_t i = 0; i < space.size(); ++i) os << ',';
    }
    os << '\n';
  }
  return worst;
}

int cmd_evaluate(const std::string& config_path, const std::string& design_path) {
  const ProblemConfig cfg = load_config(config_path);
  const CbrcProblem& problem = *cfg.problem;
  const std::vector<double> w = load_design(design_path, *problem.space());
  const Design xi(problem.space(), w);
  std::cout << "criterion " << cbrc_value(problem, xi).to_string() << '\n';
  const auto terms = cbrc_terms(problem, w);
  for (std::size_t j = 0; j < terms.size(); ++j) std::cout << "term " << j + 1 << ' ' << terms[j].to_string() << '\n';
  const FeasibilityReport rep = check_feasible(problem.constraints(), xi);
  std::cout << "feasible " << (rep.feasible ? "true" : "false") << '\n';
  for (const auto& v : rep.violations) std::cout << "violation " << v << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("CBRC_LOG")) log_level = std::atoi(env);

  CLI::App app{"Optimal experimental designs under the compound Bayes risk criterion"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress output");

  SolveFlags flags;
  auto add_solver_flags = [&flags](CLI::App* sub) {
    sub->add_option("--mode", flags.mode, "approximate or exact")->check(CLI::IsMember({"approximate", "exact"}));
    sub->add_option("--tol", flags.tol, "Conic solver tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--gap-tol", flags.gap_tol, "Branch-and-bound relative gap tolerance")->check(CLI::NonNegativeNumber);
    sub->add_option("--node-limit", flags.node_limit, "Branch-and-bound node limit")->check(CLI::PositiveNumber);
    sub->add_option("--seed", flags.seed, "Recorded in the output; the solvers are deterministic");
  };

  std::string config, output, design, dump;
  auto* solve = app.add_subcommand("solve", "Compute an optimal design");
  solve->add_option("config", config, "Problem configuration (JSON)")->required();
  solve->add_option("-o,--output", output, "Solution file (JSON)")->required();
  solve->add_option("--dump-conic", dump, "Write the conic program (approximate mode) as text");
  add_solver_flags(solve);

  double start = 0.0, stop = 0.0, step = 0.005;
  auto* sweep = app.add_subcommand("sweep", "Solve over a grid of rescaled slope variances rho");
  sweep->add_option("config", config, "Problem configuration (JSON)")->required();
  sweep->add_option("--start", start, "First rho")->required();
  sweep->add_option("--stop", stop, "Last rho")->required();
  sweep->add_option("--step", step, "Grid step (default 0.005)");
  sweep->add_option("-o,--output", output, "Output CSV")->required();
  add_solver_flags(sweep);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate the criterion and feasibility of a design");
  evaluate->add_option("config", config, "Problem configuration (JSON)")->required();
  evaluate->add_option("design", design, "Design or solution file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kInput;
  }
  if (quiet) log_level = 0;

  try {
    if (*solve) return cmd_solve(config, output, dump, flags);
    if (*sweep) return cmd_sweep(config, start, stop, step, output, flags);
    if (*evaluate) return cmd_evaluate(config, design);
  } catch (const ConfigError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kInput;
}
