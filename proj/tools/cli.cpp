#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "phm/casebook.hpp"
#include "phm/errors.hpp"
#include "phm/integrals.hpp"
#include "phm/model_io.hpp"
#include "phm/numerics.hpp"
#include "phm/report.hpp"
#include "phm/solve.hpp"

namespace phm {

namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

struct Common {
  std::uint64_t seed = 42;
  std::string out;
  std::string format = "json";
};

struct DeriveFlags {
  std::optional<int> degree;
  bool with_logs = false;
  bool unknown_rates = false;
  std::string ansatz;
};

struct SimulateFlags {
  std::vector<std::string> ic;
  std::vector<std::string> set;
  std::vector<std::string> watch;
  double t0 = 0;
  double t1 = 10;
  double dt = 1e-3;
  std::string precision = "double";
  std::size_t store_every = 1;
  std::optional<double> tol;
};

bool is_case(const std::string& name) {
  for (const auto& n : case_names())
    if (n == name) return true;
  return name == "harmonic";
}

// A path to a model file, or a builtin model name or file stem.
SystemModel resolve_model(const std::string& arg) {
  if (fs::exists(arg)) return load_model(arg);
  const std::string stem = fs::path(arg).stem().string();
  if (is_case(stem)) return builtin_model(stem);
  throw SemanticError("no model file or builtin model '" + arg + "'");
}

double parse_number(const std::string& text) {
  SymbolTable table;
  double v = eval_numeric(parse_expr(text, table), {});
  if (!std::isfinite(v)) throw SemanticError("value '" + text + "' is not finite");
  return v;
}

// "a=1,b=2" pieces, already split on commas.
ParamValues parse_assignments(const std::vector<std::string>& items) {
  ParamValues out;
  for (const auto& item : items) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw SemanticError("expected NAME=VALUE, got '" + item + "'");
    out[item.substr(0, eq)] = parse_number(item.substr(eq + 1));
  }
  return out;
}

Precision parse_precision(const std::string& s) {
  if (s == "double") return Precision::Double;
  if (s == "long") return Precision::LongDouble;
  if (s == "quad") return Precision::Quad;
  throw SemanticError("unknown precision '" + s + "'");
}

AnsatzTemplate choose_template(const SystemModel& sys, const DeriveFlags& f) {
  if (!f.ansatz.empty()) return load_ansatz(f.ansatz, sys);
  if (!f.degree && !f.with_logs && is_case(sys.name)) {
    CaseExpectation ex = case_expectation(sys.name);
    if (same_model(ex.model, sys)) return ex.tmpl;
  }
  const int degree = f.degree.value_or(2);
  if (degree < 0 || degree > 4) throw SemanticError("--degree must be in 0..4");
  return default_template(sys, degree, f.with_logs, f.unknown_rates);
}

void emit(const Json& j, const Common& c, std::ostream& out) {
  std::string text = c.format == "text" ? text_report(j) : j.dump(2) + "\n";
  if (c.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw Error("cannot write '" + c.out + "'");
  f << text;
}

// "xi = ...", "eta = ..." (or eta1, eta2, ...), "B = ..." and "assume EXPR = 0" lines.
std::pair<SymmetryCandidate, ConstraintSet> load_candidate(const std::string& path, const SystemModel& sys) {
  std::ifstream in(path);
  if (!in) throw SemanticError("cannot read '" + path + "'");
  std::ostringstream body;
  ConstraintSet cs;
  SymbolTable table = sys.symbol_table();
  std::string line;
  while (std::getline(in, line)) {
    std::string s = line.substr(0, line.find('#'));
    auto first = s.find_first_not_of(" \t");
    if (first != std::string::npos && s.compare(first, 7, "assume ") == 0) {
      std::string rel = s.substr(first + 7);
      auto eq = rel.rfind('=');
      if (eq == std::string::npos) throw SemanticError("assume needs '= 0': " + line);
      Expr lhs = parse_expr(rel.substr(0, eq), table);
      Expr rhs = parse_expr(rel.substr(eq + 1), table);
      cs.add(lhs - rhs);
      continue;
    }
    body << s << "\n";
  }
  AnsatzTemplate tmpl = parse_ansatz(body.str(), sys, path);
  auto names = unknown_function_names(sys);
  auto sum = [&](const std::string& fn) {
    auto it = tmpl.basis.find(fn);
    return it == tmpl.basis.end() ? Expr() : add(it->second);
  };
  SymmetryCandidate cand;
  cand.xi = sum(names.front());
  for (std::size_t i = 0; i < sys.pairs.size(); ++i) cand.eta[sys.pairs[i].q] = sum(names[i + 1]);
  cand.B = sum(names.back());
  return {cand, cs};
}

int cmd_derive(const std::string& model, const DeriveFlags& f, const Common& c, std::ostream& out) {
  SystemModel sys = resolve_model(model);
  SolveOptions opts;
  opts.seed = c.seed;
  SolutionSet s = solve_determining(sys, choose_template(sys, f), opts);
  emit(solution_report(sys, s, c.seed), c, out);
  return kOk;
}

int cmd_verify(const std::string& model, const std::string& candidate, const Common& c, std::ostream& out) {
  SystemModel sys = resolve_model(model);
  Json j{{"model", sys.name}, {"seed", c.seed}};
  bool pass = true;
  if (!candidate.empty()) {
    auto [cand, cs] = load_candidate(candidate, sys);
    VerifyReport rep = verify_candidate(sys, cand, cs, c.seed);
    Json r = to_json(rep);
    r["candidate"] = to_json(cand);
    r["constraints"] = to_json(cs);
    if (rep.pass && !cand.is_zero()) {
      try {
        r["integral"] = to_json(assemble_first_integral(sys, cand, cs, c.seed));
      } catch (const Error& e) {
        r["integral_error"] = e.what();
      }
    }
    pass = rep.pass;
    j["candidates"] = Json::array({r});
  } else {
    if (!is_case(sys.name)) throw SemanticError("no casebook operators for '" + sys.name + "'; pass --candidate");
    CaseExpectation ex = case_expectation(sys.name);
    Json arr = Json::array();
    for (std::size_t k = 0; k < ex.operators.size(); ++k) {
      VerifyReport rep = verify_candidate(sys, ex.operators[k], ex.constraints, c.seed);
      Json r = to_json(rep);
      r["candidate"] = to_json(ex.operators[k]);
      if (k < ex.integrals.size()) {
        ConservationReport cr = check_conservation(sys, ex.integrals[k], ex.constraints, c.seed);
        r["integral"] = render(ex.integrals[k]);
        r["conservation"] = to_string(cr.verdict);
        if (cr.verdict != ZeroVerdict::Zero) pass = false;
      }
      pass = pass && rep.pass;
      arr.push_back(r);
    }
    j["constraints"] = to_json(ex.constraints);
    j["candidates"] = arr;
  }
  j["pass"] = pass;
  emit(j, c, out);
  return pass ? kOk : kFailed;
}

int cmd_integrals(const std::string& model, const DeriveFlags& f, const Common& c, std::ostream& out) {
  SystemModel sys = resolve_model(model);
  SolveOptions opts;
  opts.seed = c.seed;
  SolutionSet s = solve_determining(sys, choose_template(sys, f), opts);
  Json branches = Json::array();
  bool pass = true;
  for (const auto& b : s.branches) {
    Json list = Json::array();
    std::vector<Expr> found;
    for (const auto& o : b.operators) {
      if (o.trivial || !o.verified) continue;
      try {
        FirstIntegral fi = assemble_first_integral(sys, o.op, b.constraints, c.seed);
        fi.I = substitute(fi.I, b.substitutions);
        found.push_back(fi.I);
        Json jf = to_json(fi);
        jf["name"] = "I" + std::to_string(found.size());
        jf["rates"] = to_json(o.rates);
        list.push_back(jf);
      } catch (const ConservationFailed& e) {
        pass = false;
        list.push_back({{"error", e.what()}, {"residual", e.residual}});
      }
    }
    Json jb{{"constraints", to_json(b.constraints)}, {"substitutions", to_json(b.substitutions)}, {"integrals", list}};
    if (!found.empty()) jb["dependence"] = to_json(dependence_rank(sys, found, b.constraints, 20, c.seed));
    branches.push_back(jb);
  }
  emit({{"model", sys.name}, {"seed", c.seed}, {"branches", branches}, {"pass", pass}}, c, out);
  return pass ? kOk : kFailed;
}

Expr watch_expr(const SystemModel& sys, const std::string& w) {
  if (w.size() > 1 && w[0] == 'I' && w.find_first_not_of("0123456789", 1) == std::string::npos) {
    if (!is_case(sys.name)) throw SemanticError("no casebook integrals for '" + sys.name + "'");
    auto integrals = case_expectation(sys.name).integrals;
    std::size_t k = std::stoul(w.substr(1));
    if (k == 0 || k > integrals.size())
      throw SemanticError(w + " is out of range; the casebook lists " + std::to_string(integrals.size()));
    return integrals[k - 1];
  }
  return eliminate_controls(sys, parse_expr(w, sys.symbol_table()));
}

int cmd_simulate(const std::string& model, const SimulateFlags& f, const Common& c, std::ostream& out,
                 std::ostream& err) {
  SystemModel sys = resolve_model(model);
  ParamValues ic = parse_assignments(f.ic);
  if (ic.empty()) {
    if (!is_case(sys.name)) throw SemanticError("--ic is required");
    ic = case_expectation(sys.name).scenario.ic;
  }
  ParamValues params = model_params(sys, parse_assignments(f.set));
  std::vector<std::pair<std::string, Expr>> watches;
  for (const auto& w : f.watch) watches.emplace_back(w, watch_expr(sys, w));

  IntegrateOptions opts;
  opts.precision = parse_precision(f.precision);
  opts.store_every = f.store_every;
  Trajectory traj = integrate(sys, params, ic, f.t0, f.t1, f.dt, opts);

  Json summary = Json::array();
  bool pass = true;
  for (const auto& [name, e] : watches) {
    DriftReport d = drift(sys, traj, e);
    Json jd{{"watch", name}, {"expression", render(e)}};
    jd.update(to_json(d));
    if (f.tol) {
      jd["pass"] = d.relative < *f.tol;
      pass = pass && d.relative < *f.tol;
    }
    summary.push_back(jd);
  }
  Json j{{"model", sys.name}, {"seed", c.seed},          {"t0", f.t0},
         {"t1", f.t1},        {"dt", traj.h},            {"precision", f.precision},
         {"steps", traj.times.size() - 1}, {"drift", summary}};

  if (c.out.empty()) {
    write_csv(out, sys, traj);
    err << (c.format == "text" ? text_report(j) : j.dump() + "\n");
  } else {
    std::ofstream csv(c.out);
    if (!csv) throw Error("cannot write '" + c.out + "'");
    write_csv(csv, sys, traj);
    out << (c.format == "text" ? text_report(j) : j.dump(2) + "\n");
  }
  return pass ? kOk : kFailed;
}

int cmd_casebook(const std::vector<std::string>& names, const Common& c, std::ostream& out) {
  std::vector<std::string> list = names.empty() ? case_names() : names;
  Json reports = Json::array();
  bool pass = true;
  for (const auto& n : list) {
    if (!is_case(n)) throw SemanticError("unknown case '" + n + "'");
    CaseReport rep = run_case(n, c.seed);
    pass = pass && rep.pass;
    reports.push_back(to_json(rep));
  }
  emit({{"seed", c.seed}, {"cases", reports}, {"pass", pass}}, c, out);
  return pass ? kOk : kFailed;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", c.out, "Output file");
  cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
}

void add_derive_flags(CLI::App* cmd, DeriveFlags& f) {
  cmd->add_option("--degree", f.degree, "Monomial degree of the default template (0..4)");
  cmd->add_flag("--with-logs", f.with_logs, "Include logarithms of the states");
  cmd->add_flag("--unknown-rates", f.unknown_rates, "Include exp(lambda t) with an unknown rate");
  cmd->add_option("--ansatz", f.ansatz, "Ansatz template file")->check(CLI::ExistingFile);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Partial Hamiltonian operators and first integrals", "phm"};
  app.require_subcommand(1);
  Common common;
  DeriveFlags df;
  SimulateFlags sf;
  std::string model;
  std::string candidate;
  std::vector<std::string> cases;

  auto* derive = app.add_subcommand("derive", "Solve the determining equations of a model");
  derive->add_option("model", model, "Model file or builtin name")->required();
  add_derive_flags(derive, df);
  add_common(derive, common);

  auto* verify = app.add_subcommand("verify", "Check candidate operators and their integrals");
  verify->add_option("model", model, "Model file or builtin name")->required();
  verify->add_option("--candidate", candidate, "Operator file (xi, eta, B, assume lines)")->check(CLI::ExistingFile);
  add_common(verify, common);

  auto* integrals = app.add_subcommand("integrals", "Derive operators, assemble integrals, test dependence");
  integrals->add_option("model", model, "Model file or builtin name")->required();
  add_derive_flags(integrals, df);
  add_common(integrals, common);

  auto* simulate = app.add_subcommand("simulate", "Integrate with RK4 and report drift of watched quantities");
  simulate->add_option("model", model, "Model file or builtin name")->required();
  simulate->add_option("--ic", sf.ic, "Initial values NAME=VALUE,...")->delimiter(',');
  simulate->add_option("--set", sf.set, "Parameter overrides NAME=VALUE,...")->delimiter(',');
  simulate->add_option("--watch", sf.watch, "Expression or casebook integral I1, I2, ...");
  simulate->add_option("--t0", sf.t0)->capture_default_str();
  simulate->add_option("--t1", sf.t1)->capture_default_str();
  simulate->add_option("--dt", sf.dt)->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--precision", sf.precision)
      ->check(CLI::IsMember({"double", "long", "quad"}))
      ->capture_default_str();
  simulate->add_option("--store-every", sf.store_every, "Keep every n-th step")->capture_default_str();
  simulate->add_option("--tol", sf.tol, "Fail if a relative drift reaches this value");
  add_common(simulate, common);

  auto* casebook = app.add_subcommand("casebook", "Run the reference cases");
  casebook->add_option("cases", cases, "Case names (default: all four)");
  add_common(casebook, common);

  std::vector<std::string> argv_store{"phm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*derive) return cmd_derive(model, df, common, out);
    if (*verify) return cmd_verify(model, candidate, common, out);
    if (*integrals) return cmd_integrals(model, df, common, out);
    if (*simulate) return cmd_simulate(model, sf, common, out, err);
    if (*casebook) return cmd_casebook(cases, common, out);
  } catch (const ParseError& e) {
    err << "parse error";
    if (e.line) err << " at line " << e.line << ", column " << e.column;
    err << ": " << e.what() << "\n";
    return kUsage;
  } catch (const SemanticError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}

}  // namespace phm
