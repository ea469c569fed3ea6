#include "phm/casebook.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "phm/errors.hpp"
#include "phm/integrals.hpp"
#include "phm/model_io.hpp"

namespace phm {

namespace {

const char* const kGrowth = R"(# Optimal growth with an environmental asset s and consumption c.
model growth_env
param rho > 0 = 0.05
param sigma > 0 = 2
param phi > 0 = 0.5
param m > 0 = 0.1
pair (s, p)
control c with p = c^(-sigma)*s^(phi*(1 - sigma))
H = (c*s^phi)^(1 - sigma)/(1 - sigma) + p*(m*s - c)
Gamma[p] = rho*p
separate_by c
)";

const char* const kMechanical = R"(# Two degrees of freedom with the non-potential force -p2 on the first.
model mechanical
pair (q1, p1)
pair (q2, p2)
H = p1^2/2 + p2^2/2 + q2^2/2
Gamma[p1] = -p2
separate_by p1, p2
)";

const char* const kDuffing = R"(# Force-free Duffing-Van der Pol oscillator q'' + (alpha + beta q^2) q' - gamma q + q^3 = 0.
model duffing_vdp
param alpha = 1
param beta = 1
param gamma = 6
pair (q, p)
H = -p^2/2 + gamma*q^2/2 - q^4/4
Gamma[p] = -(alpha + beta*q^2)*p
separate_by p
)";

const char* const kLotkaVolterra = R"(# Predator-prey: q prey, p predator.
model lotka_volterra
param a = 1
param b = 0.5
param m = -1
param n = 0.3
pair (q, p)
H = a*p*q - (b/2)*p^2*q
Gamma[p] = -b*p^2/2 + (a - m)*p + n*p*q
separate_by p
)";

const char* const kHarmonic = R"(model harmonic
pair (q, p)
H = p^2/2 + q^2/2
separate_by p
)";

Expr parse_in(const SystemModel& sys, const std::string& text, const std::vector<std::string>& extra = {}) {
  SymbolTable t = sys.symbol_table();
  for (const auto& n : extra) t.declare(n, SymbolKind::Parameter);
  return parse_expr(text, t);
}

ConstraintSet relations(const SystemModel& sys, const std::vector<std::string>& texts) {
  ConstraintSet cs;
  for (const auto& r : texts) cs.add(parse_in(sys, r));
  return cs;
}

CaseExpectation growth_case() {
  CaseExpectation c;
  c.name = "growth_env";
  c.model = builtin_model(c.name);
  const auto& sys = c.model;
  auto P = [&](const std::string& s) { return parse_in(sys, s); };
  c.tmpl = default_template(sys, 1, false, true);
  c.operators = {
      {P("exp(-rho*t)"), {{"s", P("s*rho/((1 - sigma)*(phi + 1))*exp(-rho*t)")}}, Expr()},
      {P("exp((rho - m*phi - m)*(1 - sigma)/sigma*t)"), {{"s", P("m*s*exp((rho - m*phi - m)*(1 - sigma)/sigma*t)")}},
       Expr()},
      {Expr(), {{"s", P("s^(-phi)*exp(-(rho - m*phi - m)*t)")}}, Expr()},
  };
  c.integrals = {
      P("rho*p*s*exp(-rho*t)/((phi + 1)*(1 - sigma)) - exp(-rho*t)*((c*s^phi)^(1 - sigma)/(1 - sigma) + p*(m*s - c))"),
      P("exp((rho - m*phi - m)*(1 - sigma)/sigma*t)*(p*c - (c*s^phi)^(1 - sigma)/(1 - sigma))"),
      P("p*s^(-phi)*exp((m*phi + m - rho)*t)"),
  };
  c.rank = 2;

  const std::vector<std::string> x{"s0"};
  Expr c0 = parse_in(sys, "s0*(rho + m*(sigma - 1)*(phi + 1))/(sigma*(phi + 1))", x);
  Expr g = P("(m*(phi + 1) - rho)/(sigma*(phi + 1))");
  Expr t = sys.t(), s0 = Expr::parameter("s0");
  ClosedForm cf;
  cf.solution = {{"s", s0 * exp(g * t)},
                 {"c", c0 * exp(g * t)},
                 {"p", pow(c0, -sys.param("sigma")) * pow(s0, P("phi*(1 - sigma)")) *
                           exp((P("rho - m") - sys.param("phi") * c0 / s0) * t)}};
  cf.params = model_params(sys);
  cf.params["s0"] = 1;
  c.closed_form = cf;

  // Below the balanced path (c/s = 1/15), where I1 would vanish; s stays positive.
  c.scenario.params = model_params(sys);
  c.scenario.ic = {{"s", 1}, {"c", 0.05}};

  GrowthChecks gc;
  gc.rate = g;
  gc.transversality = P("exp(-rho*t)*p*s");
  gc.violating = {{"rho", 0.01}, {"m", 1}, {"sigma", 0.5}, {"phi", 1}, {"s0", 1}, {"a", 1}};
  // p from I3 = a, since the balanced path would need c0 < 0 here.
  Expr p_from_i3 = parse_in(sys, "a*s^phi*exp((rho - m*phi - m)*t)", {"a"});
  gc.violating_path = {{"s", cf.solution.at("s")}, {"p", substitute(p_from_i3, {{"s", cf.solution.at("s")}})}};
  c.growth = gc;
  return c;
}

CaseExpectation mechanical_case() {
  CaseExpectation c;
  c.name = "mechanical";
  c.model = builtin_model(c.name);
  const auto& sys = c.model;
  auto P = [&](const std::string& s) { return parse_in(sys, s); };
  Expr t = sys.t(), q1 = sys.var("q1"), q2 = sys.var("q2");
  std::vector<Expr> eta{1, t, q2, sin(t), cos(t)}, B;
  for (const auto& m : {Expr(1), q1, q2, t, q1 * q1, q1 * q2, q1 * t, q2 * q2, q2 * t, t * t})
    for (const auto& f : {Expr(1), sin(t), cos(t)}) B.push_back(m * f);
  c.tmpl = AnsatzTemplate{}.with("xi", {1}).with("eta1", eta).with("eta2", eta).with("B", B);
  c.operators = {
      {Expr(1), {{"q1", -q2}, {"q2", Expr()}}, P("q2^2/2")},
      {Expr(), {{"q1", t}, {"q2", Expr(1)}}, P("q1 - t*q2")},
      {Expr(), {{"q1", Expr(1)}, {"q2", Expr()}}, -q2},
      {Expr(), {{"q1", Expr()}, {"q2", sin(t)}}, q2 * cos(t)},
      {Expr(), {{"q1", Expr()}, {"q2", cos(t)}}, -q2 * sin(t)},
  };
  c.integrals = {P("q2^2 + q2*p1 + p1^2/2 + p2^2/2"), P("q1 - t*q2 - t*p1 - p2"), P("q2 + p1"),
                 P("q2*cos(t) - p2*sin(t)"), P("q2*sin(t) + p2*cos(t)")};
  c.rank = 4;
  c.dependence = {dependence_relation("I1 - I3^2/2 - I4^2/2 - I5^2/2", 5)};
  ClosedForm cf;
  cf.solution = {{"q1", P("t - sin(t) + cos(t)")}, {"q2", P("sin(t) + cos(t)")},
                 {"p1", P("1 - cos(t) - sin(t)")}, {"p2", P("cos(t) - sin(t)")}};
  c.closed_form = cf;
  c.scenario.ic = {{"q1", 2}, {"q2", 1}, {"p1", 0}, {"p2", 1}};
  return c;
}

CaseExpectation duffing_case() {
  CaseExpectation c;
  c.name = "duffing_vdp";
  c.model = builtin_model(c.name);
  const auto& sys = c.model;
  auto P = [&](const std::string& s) { return parse_in(sys, s); };
  Expr e = exp(unknown_rate() * sys.t()), q = sys.var("q");
  std::vector<Expr> eta, B;
  for (int k = 0; k <= 3; ++k) eta.push_back(e * pow(q, Expr(k)));
  for (int k = 0; k <= 6; ++k) B.push_back(e * pow(q, Expr(k)));
  c.tmpl = AnsatzTemplate{}.with("xi", {e}).with("eta", eta).with("B", B);
  c.constraints = relations(sys, {"beta^2*gamma + 3*alpha*beta - 9"});
  c.exact_constraints = true;
  c.rates = {P("6/beta"), P("3/beta")};
  c.operators = {
      {P("exp(6*t/beta)"),
       {{"q", P("-q/(3*beta)*(beta^2*q^2 + 3*alpha*beta - 9)*exp(6*t/beta)")}},
       P("-q^2/(18*beta^2)*(beta^4*q^4 + (6*alpha*beta^3 - 45/2*beta^2)*q^2 + 9*alpha^2*beta^2 - 81*alpha*beta + "
         "162)*exp(6*t/beta)")},
      {Expr(), {{"q", P("exp(3*t/beta)")}}, P("q/(3*beta)*(beta^2*q^2 + 3*alpha*beta - 9)*exp(3*t/beta)")},
  };
  c.integrals = {P("(p - (alpha*beta - 3)*q/beta - beta*q^3/3)^2*exp(6*t/beta)/2"),
                 P("(p - (alpha*beta - 3)*q/beta - beta*q^3/3)*exp(3*t/beta)")};
  c.rank = 1;
  c.dependence = {dependence_relation("I1 - I2^2/2", 2)};
  ClosedForm cf;
  const std::vector<std::string> x{"a2"};
  Expr qs = parse_in(sys,
                     "sqrt(9*a2*(alpha*beta - 3)^2*exp(-2*(alpha*beta - 3)*t/beta) - 3*beta^2*(alpha*beta - 3)*"
                     "exp(-4*(alpha*beta - 3)*t/beta))/(beta^2*exp(-2*(alpha*beta - 3)*t/beta) - 3*a2*(alpha*beta - 3))",
                     x);
  cf.solution = {{"q", qs}, {"p", substitute(P("(alpha*beta - 3)*q/beta + beta*q^3/3"), {{"q", qs}})}};
  cf.params = model_params(sys);
  cf.params["a2"] = 1;
  c.closed_form = cf;
  c.scenario.params = model_params(sys);
  c.scenario.ic = {{"q", 1}, {"p", 0}};
  c.scenario.precision = Precision::Quad;
  c.witnesses = {{"gamma = 7", model_params(sys, {{"gamma", 7}}), 1e-3}};
  return c;
}

CaseExpectation lotka_volterra_case() {
  CaseExpectation c;
  c.name = "lotka_volterra";
  c.model = builtin_model(c.name);
  const auto& sys = c.model;
  auto P = [&](const std::string& s) { return parse_in(sys, s); };
  Expr e = exp(unknown_rate() * sys.t()), q = sys.var("q");
  c.tmpl = AnsatzTemplate{}
               .with("xi", {e / q})
               .with("eta", {e, e * q, e * ln(q)})
               .with("B", {e, e * q, e * q * q, e * ln(q), e * q * ln(q), e * pow(ln(q), Expr(2))});
  c.constraints = relations(sys, {"a + m"});
  c.rates = {P("-2*a"), P("-a")};
  c.operators = {
      {P("exp(-2*a*t)/q"), {{"q", P("(a + n*q)*exp(-2*a*t)")}}, P("-n^2*q^2/(2*b)*exp(-2*a*t)")},
      {Expr(), {{"q", P("-exp(-a*t)/a")}}, P("n*q/(a*b)*exp(-a*t)")},
  };
  c.integrals = {P("exp(-2*a*t)*(b*p + n*q)^2/(2*b)"), P("-exp(-a*t)*(b*p + n*q)/(a*b)")};
  c.rank = 1;
  c.dependence = {substitute(dependence_relation("I1 - A*I2^2", 2), {{"A", P("a^2*b/2")}})};
  ClosedForm cf;
  const std::vector<std::string> x{"alpha1", "alpha2"};
  Expr den = parse_in(sys, "n - a*b*alpha1*alpha2*exp(-b*alpha1*exp(a*t))", x);
  cf.solution = {{"q", parse_in(sys, "-a*b*alpha1*exp(a*t)", x) / den},
                 {"p", parse_in(sys, "-a*alpha1*exp(a*t)", x) + parse_in(sys, "a*n*alpha1*exp(a*t)", x) / den}};
  cf.params = model_params(sys);
  cf.params["alpha1"] = -1;
  cf.params["alpha2"] = 1;
  c.closed_form = cf;
  c.scenario.params = model_params(sys);
  c.scenario.ic = {{"q", 1}, {"p", 1}};
  c.witnesses = {{"m = 1", model_params(sys, {{"m", 1}}), 1e-3}};
  return c;
}

CaseExpectation harmonic_case() {
  CaseExpectation c;
  c.name = "harmonic";
  c.model = builtin_model(c.name);
  const auto& sys = c.model;
  c.tmpl = AnsatzTemplate{}.with("xi", {Expr(1)}).with("B", {Expr(1)});
  c.operators = {{Expr(1), {{"q", Expr()}}, Expr()}};
  c.integrals = {-sys.H};
  c.rank = 1;
  ClosedForm cf;
  cf.solution = {{"q", cos(sys.t())}, {"p", -sin(sys.t())}};
  c.closed_form = cf;
  c.scenario.ic = {{"q", 1}, {"p", 0}};
  return c;
}

bool pins_zero(const SolutionBranch& b) {
  for (const auto& r : b.constraints.relations())
    if (r.is_symbol()) return true;
  return false;
}

bool has_nontrivial(const SolutionBranch& b) {
  for (const auto& o : b.operators)
    if (!o.trivial) return true;
  return false;
}

std::set<Expr, ExprLess> relation_set(const ConstraintSet& cs) {
  std::set<Expr, ExprLess> out;
  for (const auto& r : cs.relations()) out.insert(normalize_relation(r));
  return out;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

std::string builtin_model_text(const std::string& name) {
  if (name == "growth_env") return kGrowth;
  if (name == "mechanical") return kMechanical;
  if (name == "duffing_vdp") return kDuffing;
  if (name == "lotka_volterra") return kLotkaVolterra;
  if (name == "harmonic") return kHarmonic;
  throw SemanticError("no builtin model '" + name + "'");
}

SystemModel builtin_model(const std::string& name) { return parse_model(builtin_model_text(name), name); }

std::vector<SystemModel> builtin_models() {
  std::vector<SystemModel> out;
  for (const auto& n : case_names()) out.push_back(builtin_model(n));
  return out;
}

std::vector<std::string> case_names() { return {"growth_env", "mechanical", "duffing_vdp", "lotka_volterra"}; }

CaseExpectation case_expectation(const std::string& name) {
  if (name == "growth_env") return growth_case();
  if (name == "mechanical") return mechanical_case();
  if (name == "duffing_vdp") return duffing_case();
  if (name == "lotka_volterra") return lotka_volterra_case();
  if (name == "harmonic") return harmonic_case();
  throw SemanticError("no builtin case '" + name + "'");
}

Expr dependence_relation(const std::string& text, std::size_t count) {
  SymbolTable t;
  for (std::size_t i = 1; i <= count; ++i) t.declare("I" + std::to_string(i), SymbolKind::Variable);
  t.declare("A", SymbolKind::Parameter);
  return parse_expr(text, t);
}

bool equal_up_to_factor(const SystemModel& sys, const Expr& a, const Expr& b, std::uint64_t seed) {
  Expr x = eliminate_controls(sys, a), y = eliminate_controls(sys, b);
  const auto dom = sys.sampling_domain(seed);
  if (is_zero(y, dom) == ZeroVerdict::Zero) return is_zero(x, dom) == ZeroVerdict::Zero;
  if (is_zero(x, dom) != ZeroVerdict::NonZero) return false;
  std::vector<std::string> vars{SystemModel::time};
  for (const auto& v : sys.phase_variables()) vars.push_back(v);
  for (const auto& v : vars)
    if (is_zero(x * differentiate(y, v) - y * differentiate(x, v), dom) != ZeroVerdict::Zero) return false;
  return true;
}

const CaseStep* CaseReport::step(const std::string& name) const {
  for (const auto& s : steps)
    if (s.name == name) return &s;
  return nullptr;
}

CaseReport run_case(const std::string& name, std::uint64_t seed) { return run_case(case_expectation(name), seed); }

CaseReport run_case(const CaseExpectation& ex, std::uint64_t seed) {
  CaseReport rep;
  rep.name = ex.name;
  rep.seed = seed;
  const SystemModel& sys = ex.model;

  auto run = [&](const std::string& name, const std::function<std::string(bool&)>& body) {
    CaseStep st;
    st.name = name;
    auto t0 = std::chrono::steady_clock::now();
    try {
      st.pass = true;
      st.detail = body(st.pass);
    } catch (const std::exception& e) {
      st.pass = false;
      st.detail = std::string("error: ") + e.what();
    }
    st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!st.pass) rep.diffs.push_back(name + ": " + st.detail);
    rep.steps.push_back(st);
    return st.pass;
  };

  // Admission: the expectation itself must hold.
  run("admission", [&](bool& ok) {
    std::vector<std::string> bad;
    for (std::size_t k = 0; k < ex.integrals.size(); ++k) {
      auto v = check_conservation(sys, ex.integrals[k], ex.constraints, seed).verdict;
      if (v != ZeroVerdict::Zero) bad.push_back("I" + std::to_string(k + 1) + " " + to_string(v));
    }
    ok = bad.empty();
    return ok ? std::to_string(ex.integrals.size()) + " expected integrals conserved" : "not conserved: " + join(bad);
  });

  SolutionSet sol;
  bool solved = run("solve", [&](bool&) {
    SolveOptions opts;
    opts.seed = seed;
    sol = solve_determining(sys, ex.tmpl, opts);
    return std::to_string(sol.unknowns) + " unknowns, " + std::to_string(sol.equations) + " equations, " +
           std::to_string(sol.branches.size()) + " branches";
  });
  if (!solved) {
    rep.pass = false;
    return rep;
  }

  const SolutionBranch* branch = nullptr;
  const auto want = relation_set(ex.constraints);
  for (const auto& b : sol.branches)
    if (relation_set(b.constraints) == want) branch = &b;

  run("constraints", [&](bool& ok) {
    std::vector<std::string> found;
    for (const auto* b : sol.constrained())
      if (has_nontrivial(*b)) found.push_back("{" + join(b->constraints.str()) + "}");
    if (!branch) {
      ok = false;
      return "no branch with {" + join(ex.constraints.str()) + "}; found " + join(found);
    }
    if (ex.exact_constraints) {
      std::vector<std::string> extra;
      for (const auto* b : sol.constrained())
        if (b != branch && has_nontrivial(*b) && !pins_zero(*b)) extra.push_back("{" + join(b->constraints.str()) + "}");
      ok = extra.empty();
      if (!ok) return "unexpected branches " + join(extra);
    }
    return ex.constraints.empty() ? std::string("generic branch") : "branch {" + join(branch->constraints.str()) + "}";
  });
  if (!branch) {
    rep.pass = false;
    return rep;
  }
  const Bindings& subs = branch->substitutions;

  std::vector<SymmetryCandidate> found;
  for (const auto& o : branch->operators)
    if (!o.trivial) found.push_back(o.op);

  if (!ex.rates.empty()) {
    run("rates", [&](bool& ok) {
      std::set<Expr, ExprLess> got, expected;
      std::vector<std::string> shown;
      for (const auto& o : branch->operators)
        if (!o.trivial)
          for (const auto& [n, v] : o.rates)
            if (got.insert(v).second) shown.push_back(render(v));
      for (const auto& r : ex.rates) expected.insert(substitute(r, subs));
      ok = got == expected;
      return "rates " + join(shown);
    });
  }

  run("operators", [&](bool& ok) {
    std::vector<SymmetryCandidate> expected;
    for (const auto& op : ex.operators) expected.push_back(op.substituted(subs));
    bool verified = true;
    for (const auto& o : branch->operators) verified = verified && o.verified;
    ok = verified && found.size() == expected.size() && spans_equal(sys, found, expected, seed);
    return std::to_string(found.size()) + " operators" + (verified ? "" : ", some unverified") +
           (ok ? ", span matches" : ", span differs");
  });

  std::vector<Expr> expected_integrals;
  for (const auto& I : ex.integrals) expected_integrals.push_back(substitute(I, subs));

  run("integrals", [&](bool& ok) {
    std::vector<std::string> bad;
    for (std::size_t k = 0; k < found.size(); ++k) {
      try {
        assemble_first_integral(sys, found[k], branch->constraints, seed);
      } catch (const ConservationFailed&) {
        bad.push_back("solver operator " + std::to_string(k + 1) + " not conserved");
      }
    }
    for (std::size_t k = 0; k < ex.operators.size(); ++k) {
      auto fi = assemble_first_integral(sys, ex.operators[k].substituted(subs), branch->constraints, seed);
      if (!equal_up_to_factor(sys, substitute(fi.I, subs), expected_integrals[k], seed))
        bad.push_back("I" + std::to_string(k + 1) + " = " + render(fi.I));
    }
    ok = bad.empty();
    return ok ? std::to_string(found.size()) + " integrals conserved, " + std::to_string(ex.integrals.size()) +
                    " match up to constant factors"
              : join(bad);
  });

  if (ex.rank) {
    run("dependence", [&](bool& ok) {
      auto dep = dependence_rank(sys, expected_integrals, branch->constraints, 20, seed);
      std::vector<std::string> rels;
      for (const auto& r : dep.relations) rels.push_back(render(r) + " = 0");
      ok = dep.rank == *ex.rank;
      for (const auto& want_rel : ex.dependence) {
        bool hit = false;
        for (std::size_t i = 0; i < dep.relations.size(); ++i) {
          Expr ratio = normal(dep.relations[i] / substitute(want_rel, subs));
          hit = hit || (ratio.is_number() && !ratio.is_zero_literal() && dep.confirmed[i]);
        }
        ok = ok && hit;
      }
      return "rank " + std::to_string(dep.rank) + (rels.empty() ? "" : "; " + join(rels));
    });
  }

  run("drift", [&](bool& ok) {
    const auto& sc = ex.scenario;
    auto tr = integrate(sys, sc.params, sc.ic, sc.t0, sc.t1, sc.h, {sc.precision});
    std::vector<std::string> ds;
    for (std::size_t k = 0; k < expected_integrals.size(); ++k) {
      double d = drift(sys, tr, expected_integrals[k]).relative;
      ok = ok && d < sc.drift_tol;
      ds.push_back("I" + std::to_string(k + 1) + " " + fmt(d));
    }
    return "relative drift " + join(ds);
  });

  for (const auto& w : ex.witnesses) {
    run("witness", [&](bool& ok) {
      const auto& sc = ex.scenario;
      auto tr = integrate(sys, w.params, sc.ic, sc.t0, sc.t1, sc.h, {sc.precision});
      std::vector<std::string> ds;
      for (std::size_t k = 0; k < expected_integrals.size(); ++k) {
        double d = drift(sys, tr, expected_integrals[k]).relative;
        ok = ok && d > w.min_drift;
        ds.push_back("I" + std::to_string(k + 1) + " " + fmt(d));
      }
      return w.label + ": relative drift " + join(ds);
    });
  }

  if (ex.closed_form) {
    run("closed_form", [&](bool& ok) {
      const auto& cf = *ex.closed_form;
      double r = solution_residual(sys, cf.solution, cf.params, linspace(cf.t0, cf.t1, cf.samples));
      ok = r < cf.tol;
      return "residual " + fmt(r);
    });
  }

  if (ex.growth) {
    const auto& g = *ex.growth;
    const auto& cf = *ex.closed_form;
    run("growth_rates", [&](bool& ok) {
      Env env(cf.params.begin(), cf.params.end());
      const double want_rate = eval_numeric(g.rate, env);
      double worst = 0;
      for (const std::string v : {"s", "c"}) {
        Expr rate = differentiate(cf.solution.at(v), SystemModel::time) / cf.solution.at(v);
        for (double t : linspace(cf.t0, cf.t1, cf.samples)) {
          env[SystemModel::time] = t;
          worst = std::max(worst, std::fabs(eval_numeric(rate, env) - want_rate));
        }
      }
      ok = worst < g.rate_tol;
      return "rate " + fmt(want_rate) + ", max deviation " + fmt(worst);
    });
    run("transversality", [&](bool& ok) {
      auto good = transversality_limit(sys, g.transversality, cf.solution, cf.params, g.t_max);
      auto bad = transversality_limit(sys, g.transversality, g.violating_path, g.violating, g.violating_t_max);
      ok = good.decaying && good.criterion_holds() && !bad.decaying && bad.criterion && !bad.criterion_holds();
      return std::string("scenario ") + (good.decaying ? "decaying" : "not decaying") + " (criterion " +
             fmt(good.criterion.value_or(NAN)) + "); violating " + (bad.decaying ? "decaying" : "not decaying") +
             " (criterion " + fmt(bad.criterion.value_or(NAN)) + ")";
    });
  }

  rep.pass = true;
  for (const auto& s : rep.steps) rep.pass = rep.pass && s.pass;
  return rep;
}

}  // namespace phm
