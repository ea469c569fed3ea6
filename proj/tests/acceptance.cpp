// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "random_expr.hpp"

#include "phm/analysis.hpp"
#include "phm/casebook.hpp"
#include "phm/errors.hpp"
#include "phm/integrals.hpp"
#include "phm/numerics.hpp"

using namespace phm;
using phm::test::ExprGenerator;
using phm::test::NumEnv;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    pass = pass && cond;
    notes.push_back((cond ? "" : "FAILED ") + what);
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

std::map<std::string, CaseReport> g_reports;

const CaseReport& report(const std::string& name) {
  auto it = g_reports.find(name);
  if (it == g_reports.end()) it = g_reports.emplace(name, run_case(name)).first;
  return it->second;
}

void require_steps(Outcome& o, const CaseReport& rep, const std::vector<std::string>& steps) {
  for (const auto& s : steps) {
    const CaseStep* st = rep.step(s);
    o.require(st && st->pass, rep.name + " " + s + ": " + (st ? st->detail : "missing"));
  }
}

double seconds(const CaseReport& rep, const std::vector<std::string>& steps) {
  double total = 0;
  for (const auto& s : steps)
    if (const CaseStep* st = rep.step(s)) total += st->seconds;
  return total;
}

const std::vector<std::string> kSymbolic{"admission", "solve", "constraints", "operators", "integrals"};

Outcome symbolic_case(const std::string& name, std::size_t operators) {
  Outcome o;
  const CaseReport& rep = report(name);
  require_steps(o, rep, kSymbolic);
  o.require(case_expectation(name).operators.size() == operators, std::to_string(operators) + " operators expected");
  double t = seconds(rep, kSymbolic);
  o.require(t < 30, "pipeline " + fmt(t) + " s");
  return o;
}

Outcome criterion1() {
  Outcome o = symbolic_case("growth_env", 3);
  CaseExpectation ex = case_expectation("growth_env");
  o.require(ex.tmpl.size() == default_template(ex.model, 1, false, true).size(), "default template");
  for (std::size_t k = 0; k < ex.integrals.size(); ++k)
    o.require(check_conservation(ex.model, ex.integrals[k]).verdict == ZeroVerdict::Zero,
              "I" + std::to_string(k + 1) + " conserved");
  return o;
}

Outcome criterion2() { return symbolic_case("mechanical", 5); }

Outcome criterion3() {
  Outcome o;
  require_steps(o, report("duffing_vdp"), {"solve", "constraints", "rates", "operators", "integrals", "dependence"});
  CaseExpectation ex = case_expectation("duffing_vdp");
  o.require(ex.exact_constraints && ex.constraints.relations().size() == 1, "exactly one constraint expected");
  o.require(ex.rank == std::optional<std::size_t>(1), "rank 1 expected");
  return o;
}

Outcome criterion4() {
  Outcome o;
  require_steps(o, report("lotka_volterra"), {"solve", "constraints", "operators", "integrals", "dependence"});
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (const auto& name : case_names()) {
    const CaseReport& rep = report(name);
    CaseExpectation ex = case_expectation(name);
    const auto& sc = ex.scenario;
    o.require(sc.t0 == 0 && sc.t1 == 10 && sc.h == 1e-4 && sc.drift_tol == 1e-6, name + " scenario t in [0, 10], h 1e-4");
    require_steps(o, rep, {"drift"});
  }
  auto duff = case_expectation("duffing_vdp");
  o.require(duff.witnesses.size() == 1 && duff.witnesses[0].params.at("gamma") == 7 &&
                duff.witnesses[0].params.at("beta") == 1 && duff.witnesses[0].params.at("alpha") == 1 &&
                duff.witnesses[0].min_drift == 1e-3,
            "Duffing witness gamma 7, alpha = beta = 1");
  require_steps(o, report("duffing_vdp"), {"witness"});
  auto lv = case_expectation("lotka_volterra");
  o.require(lv.witnesses.size() == 1 && lv.witnesses[0].params.at("m") == 1 && lv.witnesses[0].params.at("a") == 1 &&
                lv.witnesses[0].min_drift == 1e-3,
            "Lotka-Volterra witness m = 1, a = 1");
  require_steps(o, report("lotka_volterra"), {"witness"});
  return o;
}

Outcome criterion6() {
  Outcome o;
  for (const std::string name : {"growth_env", "duffing_vdp", "lotka_volterra"}) {
    auto ex = case_expectation(name);
    if (!ex.closed_form) {
      o.require(false, name + " closed form");
      continue;
    }
    const auto& cf = *ex.closed_form;
    double r = solution_residual(ex.model, cf.solution, cf.params, linspace(0, 5, 50));
    o.require(r < 1e-10, name + " residual " + fmt(r));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  require_steps(o, report("growth_env"), {"transversality"});
  return o;
}

double fd(const Expr& e, NumEnv env, const std::string& var) {
  const double x = env[var];
  const double h = 1e-3 * std::max(1.0, std::fabs(x));
  auto f = [&](double v) {
    env[var] = v;
    return eval_numeric(e, env);
  };
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

Outcome criterion8() {
  Outcome o;
  const SymbolTable table = ExprGenerator::table();
  auto P = [&](const std::string& s) { return parse_expr(s, table); };

  ExprGenerator gen(3);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    Expr e = P(gen.expr(3).text);
    Expr d = differentiate(e, "x");
    for (int k = 0; k < 20; ++k) {
      NumEnv env = gen.point();
      double exact = eval_numeric(d, env);
      worst = std::max(worst, std::fabs(exact - fd(e, env, "x")) / std::max(std::fabs(exact), 1e-3));
    }
  }
  o.require(worst < 1e-6, "derivatives: 50 expressions x 20 points, worst relative error " + fmt(worst));

  ExprGenerator sep(17);
  int rebuilt = 0;
  for (int i = 0; i < 500; ++i) {
    Expr e = P(sep.separable(1 + sep.pick(4)).text);
    std::vector<Expr> parts;
    for (const auto& [key, coeff] : collect_by(e, {"p", "c"})) parts.push_back(key.monomial() * coeff);
    rebuilt += add(parts) == e;
  }
  o.require(rebuilt == 500, "collect_by: " + std::to_string(rebuilt) + "/500 reconstructed");

  struct Conv {
    std::string name;
    ParamValues ic;
    double t1, h;
  };
  const std::vector<Conv> conv{
      {"growth_env", {{"s", 1}, {"c", 0.05}}, 20, 0.5},
      {"mechanical", {{"q1", 2}, {"q2", 1}, {"p1", 0}, {"p2", 1}}, 2, 1e-2},
      {"duffing_vdp", {{"q", 1}, {"p", 0}}, 2, 1e-2},
      {"lotka_volterra", {{"q", 1}, {"p", 1}}, 2, 1e-2},
  };
  for (const auto& c : conv) {
    auto sys = builtin_model(c.name);
    double slope = convergence_order(sys, model_params(sys), c.ic, c.t1, c.h);
    o.require(slope >= 3.7 && slope <= 4.3, "RK4 order " + c.name + " " + fmt(slope));
  }

  ExprGenerator rt(42);
  int stable = 0;
  for (int i = 0; i < 1000; ++i) {
    Expr e = P(rt.expr(3).text);
    const std::string s = render(e);
    Expr back = P(s);
    stable += back == e && render(back) == s;
  }
  o.require(stable == 1000, "round trip: " + std::to_string(stable) + "/1000");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Symbolic reproduction, growth model", criterion1},
      {"Symbolic reproduction, mechanical system", criterion2},
      {"Constraint discovery, Duffing-Van der Pol", criterion3},
      {"Constraint discovery, Lotka-Volterra", criterion4},
      {"Numeric conservation and witnesses", criterion5},
      {"Closed-form verification", criterion6},
      {"Transversality", criterion7},
      {"Property suites", criterion8},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, std::string("error: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s %zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), s,
                detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
