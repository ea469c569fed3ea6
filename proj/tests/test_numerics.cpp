#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"

#include "phm/errors.hpp"
#include "phm/model_io.hpp"
#include "phm/numerics.hpp"

using namespace phm;
using phm::test::model;
using phm::test::P;

namespace {

Expr F(const SystemModel& sys, const std::string& text, const std::vector<std::string>& extra = {}) {
  SymbolTable t = sys.symbol_table();
  for (const auto& n : extra) t.declare(n, SymbolKind::Parameter);
  return parse_expr(text, t);
}

Bindings growth_closed_form(const SystemModel& sys) {
  const std::vector<std::string> x{"s0"};
  Expr c0 = F(sys, "s0*(rho + m*(sigma - 1)*(phi + 1))/(sigma*(phi + 1))", x);
  Expr g = F(sys, "(m*(phi + 1) - rho)/(sigma*(phi + 1))");
  Expr t = sys.t();
  Expr s0 = Expr::parameter("s0");
  return {{"s", s0 * exp(g * t)},
          {"c", c0 * exp(g * t)},
          {"p", pow(c0, -sys.param("sigma")) * pow(s0, F(sys, "phi*(1 - sigma)")) *
                    exp((F(sys, "rho - m") - sys.param("phi") * c0 / s0) * t)}};
}

Bindings duffing_closed_form(const SystemModel& sys) {
  const std::vector<std::string> x{"a2"};
  Expr q = F(sys,
             "sqrt(9*a2*(alpha*beta - 3)^2*exp(-2*(alpha*beta - 3)*t/beta) - 3*beta^2*(alpha*beta - 3)*"
             "exp(-4*(alpha*beta - 3)*t/beta))/(beta^2*exp(-2*(alpha*beta - 3)*t/beta) - 3*a2*(alpha*beta - 3))",
             x);
  Expr p = substitute(F(sys, "(alpha*beta - 3)*q/beta + beta*q^3/3"), {{"q", q}});
  return {{"q", q}, {"p", p}};
}

Bindings lv_closed_form(const SystemModel& sys) {
  const std::vector<std::string> x{"alpha1", "alpha2"};
  Expr den = F(sys, "n - a*b*alpha1*alpha2*exp(-b*alpha1*exp(a*t))", x);
  return {{"q", F(sys, "-a*b*alpha1*exp(a*t)", x) / den},
          {"p", F(sys, "-a*alpha1*exp(a*t)", x) + F(sys, "a*n*alpha1*exp(a*t)", x) / den}};
}

}  // namespace

TEST_CASE("compiled evaluator agrees with the tree evaluator") {
  auto sys = model("growth_env");
  Expr e = F(sys, "(c*s^phi)^(1 - sigma)/(1 - sigma) + p*(m*s - c) + ln(s)*sin(t)^2 - 3/7*cos(c)*exp(-rho*t)");
  std::vector<std::string> slots{"t", "s", "c", "p", "rho", "sigma", "phi", "m"};
  CompiledExpr f(e, slots);
  std::vector<double> v{0.3, 1.7, 0.4, 2.1, 0.05, 2, 0.5, 0.1};
  Env env;
  for (std::size_t i = 0; i < slots.size(); ++i) env[slots[i]] = v[i];
  CHECK(f(v) == doctest::Approx(eval_numeric(e, env)).epsilon(1e-14));
  std::vector<__float128> vq(v.begin(), v.end());
  CHECK(static_cast<double>(f.eval<__float128>(vq.data())) == doctest::Approx(eval_numeric(e, env)).epsilon(1e-14));
  CHECK(CompiledExpr(Expr(5), {})(std::vector<double>{}) == 5);
  CHECK_THROWS_AS(CompiledExpr(e, {"t"}), SemanticError);
  CompiledExpr lg(F(sys, "ln(s)"), {"s"});
  CHECK_THROWS_AS(lg(std::vector<double>{-1.0}), DomainError);
}

TEST_CASE("integration and drift") {
  SUBCASE("harmonic energy") {
    auto sys = model("harmonic");
    auto tr = integrate(sys, {}, {{"q", 1}, {"p", 0}}, 0, 10, 1e-3);
    CHECK(tr.size() == 10001);
    CHECK(tr.h == doctest::Approx(1e-3));
    CHECK(drift(sys, tr, sys.H).relative < 1e-9);
    CHECK(tr.value(tr.size() - 1, "q") == doctest::Approx(std::cos(10.0)).epsilon(1e-9));
    CHECK(drift(sys, tr, Expr(3)).relative == 0);
  }
  SUBCASE("mechanical I4") {
    auto sys = model("mechanical");
    auto tr = integrate(sys, {}, {{"q1", 1}, {"q2", 1}, {"p1", 0}, {"p2", 1}}, 0, 10, 1e-4);
    CHECK(drift(sys, tr, P(sys, "q2*cos(t) - p2*sin(t)")).relative < 1e-8);
  }
  SUBCASE("Duffing witnesses") {
    auto sys = model("duffing_vdp");
    Expr I2 = P(sys, "p*exp(3*t/beta) - q/(3*beta)*(beta^2*q^2 + 3*alpha*beta - 9)*exp(3*t/beta)");
    ParamValues ic{{"q", 1}, {"p", 0}};
    auto good = integrate(sys, model_params(sys), ic, 0, 10, 1e-3, {Precision::Quad});
    CHECK(drift(sys, good, I2).relative < 1e-6);
    auto bad = integrate(sys, model_params(sys, {{"gamma", 7}}), ic, 0, 10, 1e-3, {Precision::Quad});
    CHECK(drift(sys, bad, I2).relative > 1e-3);
  }
  SUBCASE("Lotka-Volterra witness") {
    auto sys = model("lotka_volterra");
    Expr I2 = P(sys, "-p*exp(-a*t)/a - n*q/(a*b)*exp(-a*t)");
    ParamValues ic{{"q", 1}, {"p", 1}};
    auto good = integrate(sys, model_params(sys), ic, 0, 10, 1e-3);
    CHECK(drift(sys, good, I2).relative < 1e-8);
    auto bad = integrate(sys, model_params(sys, {{"m", 1}}), ic, 0, 10, 1e-3);
    CHECK(drift(sys, bad, I2).relative > 1e-3);
  }
  SUBCASE("growth follows the balanced path") {
    auto sys = model("growth_env");
    auto params = model_params(sys);
    params["s0"] = 1;
    auto cf = growth_closed_form(sys);
    Env env(params.begin(), params.end());
    env["t"] = 0;
    double c0 = eval_numeric(cf.at("c"), env);
    ParamValues pr = model_params(sys);
    auto tr = integrate(sys, pr, {{"s", 1}, {"c", c0}}, 0, 5, 1e-3);
    env["t"] = 5;
    CHECK(tr.value(tr.size() - 1, "s") == doctest::Approx(eval_numeric(cf.at("s"), env)).epsilon(1e-10));
    CHECK(tr.value(tr.size() - 1, "c") == doctest::Approx(eval_numeric(cf.at("c"), env)).epsilon(1e-10));
    env["t"] = 0;
    auto from_p = integrate(sys, pr, {{"s", 1}, {"p", eval_numeric(cf.at("p"), env)}}, 0, 1, 1e-2);
    CHECK(from_p.ic.at("c") == doctest::Approx(c0).epsilon(1e-12));
    CHECK_THROWS_AS(integrate(sys, pr, {{"s", 1}, {"c", c0}, {"p", 1}}, 0, 1, 1e-2), SemanticError);
  }
  SUBCASE("errors") {
    auto sys = model("harmonic");
    CHECK_THROWS_AS(integrate(sys, {}, {{"q", 1}}, 0, 1, 1e-2), SemanticError);
    CHECK_THROWS_AS(integrate(sys, {}, {{"q", 1}, {"p", 0}}, 0, 1, 0), SemanticError);
    CHECK_THROWS_AS(integrate(model("duffing_vdp"), {}, {{"q", 1}, {"p", 0}}, 0, 1, 1e-2), SemanticError);
    auto blow = parse_model("model blow\npair (q, p)\nH = p*q^2\nseparate_by p\n");
    try {
      integrate(blow, {}, {{"q", 1}, {"p", 0}}, 0, 5, 1e-2);
      FAIL("expected NonFinite");
    } catch (const NonFinite& e) {
      CHECK(e.step > 50);
      CHECK(e.step < 200);
    }
  }
}

TEST_CASE("fourth-order convergence") {
  CHECK(convergence_order(model("harmonic"), {}, {{"q", 1}, {"p", 0}}, 2) == doctest::Approx(4).epsilon(0.075));
  struct Case {
    std::string name;
    ParamValues ic;
    double t1, h;
  };
  const std::vector<Case> cases{
      {"growth_env", {{"s", 1}, {"c", 0.05}}, 20, 0.5},
      {"mechanical", {{"q1", 2}, {"q2", 1}, {"p1", 0}, {"p2", 1}}, 2, 1e-2},
      {"duffing_vdp", {{"q", 1}, {"p", 0}}, 2, 1e-2},
      {"lotka_volterra", {{"q", 1}, {"p", 1}}, 2, 1e-2},
  };
  for (const auto& [name, ic, t1, h] : cases) {
    CAPTURE(name);
    auto sys = model(name);
    double slope = convergence_order(sys, model_params(sys), ic, t1, h);
    CHECK(slope > 3.7);
    CHECK(slope < 4.3);
  }
}

TEST_CASE("drift vanishes with the step size except for witnesses") {
  auto sys = model("lotka_volterra");
  Expr I2 = P(sys, "-p*exp(-a*t)/a - n*q/(a*b)*exp(-a*t)");
  ParamValues ic{{"q", 1}, {"p", 1}};
  double last = 1;
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    double good = drift(sys, integrate(sys, model_params(sys), ic, 0, 5, h, {Precision::LongDouble}), I2).relative;
    double bad =
        drift(sys, integrate(sys, model_params(sys, {{"m", 1}}), ic, 0, 5, h, {Precision::LongDouble}), I2).relative;
    CAPTURE(h);
    CHECK(good < last / 8);
    CHECK(bad > 1e-3);
    last = good;
  }
}

TEST_CASE("time reversal") {
  auto sys = model("mechanical");
  ParamValues ic{{"q1", 1}, {"q2", 1}, {"p1", 0}, {"p2", 1}};
  auto fwd = integrate(sys, {}, ic, 0, 10, 1e-4, {Precision::Double, 100000});
  ParamValues end;
  for (const auto& v : fwd.vars) end[v] = fwd.value(fwd.size() - 1, v);
  auto back = integrate(sys, {}, end, 10, 0, 1e-4, {Precision::Double, 100000});
  CHECK(back.times.back() == doctest::Approx(0).epsilon(1e-12));
  for (const auto& [v, x] : ic)
    CHECK(std::fabs(back.value(back.size() - 1, v) - x) <= 1e-6 * std::max(1.0, std::fabs(x)));
}

TEST_CASE("closed-form residuals") {
  const auto ts = linspace(0, 5, 50);
  SUBCASE("growth balanced path") {
    auto sys = model("growth_env");
    auto params = model_params(sys);
    params["s0"] = 1;
    CHECK(solution_residual(sys, growth_closed_form(sys), params, ts) < 1e-10);
    auto off = growth_closed_form(sys);
    off["c"] = off["c"] * rat(11, 10);
    CHECK(solution_residual(sys, off, params, ts) > 1e-4);
  }
  SUBCASE("Duffing reduction") {
    auto sys = model("duffing_vdp");
    auto params = model_params(sys);
    params["a2"] = 1;
    CHECK(solution_residual(sys, duffing_closed_form(sys), params, ts) < 1e-10);
  }
  SUBCASE("Lotka-Volterra") {
    auto sys = model("lotka_volterra");
    auto params = model_params(sys);
    params["alpha1"] = -1;
    params["alpha2"] = 1;
    CHECK(solution_residual(sys, lv_closed_form(sys), params, ts) < 1e-10);
  }
  SUBCASE("constant solution") {
    auto sys = parse_model("model still\npair (q, p)\nH = p^2/2\nseparate_by p\n");
    CHECK(solution_residual(sys, {{"q", Expr(2)}, {"p", Expr()}}, {}, ts) == 0);
    CHECK_THROWS_AS(solution_residual(sys, {{"q", Expr(2)}}, {}, ts), SemanticError);
  }
}

TEST_CASE("transversality") {
  auto sys = model("growth_env");
  Expr e = F(sys, "exp(-rho*t)*p*s");
  auto params = model_params(sys);
  params["s0"] = 1;
  auto rep = transversality_limit(sys, e, growth_closed_form(sys), params, 400);
  CHECK(rep.decaying);
  CHECK(rep.criterion_holds());
  CHECK(rep.trace.size() == 3);

  // Sign violation: the balanced path needs c0 < 0, so p is taken from I3 = a.
  ParamValues bad{{"rho", 0.01}, {"m", 1}, {"sigma", 0.5}, {"phi", 1}, {"s0", 1}, {"a", 1}};
  Bindings path{{"s", growth_closed_form(sys).at("s")},
                {"p", F(sys, "a*s^phi*exp((rho - m*phi - m)*t)", {"a"})}};
  path["p"] = substitute(path["p"], {{"s", path["s"]}});
  auto rb = transversality_limit(sys, e, path, bad, 40);
  CHECK_FALSE(rb.decaying);
  REQUIRE(rb.criterion);
  CHECK_FALSE(rb.criterion_holds());

  CHECK(transversality_limit(sys, Expr(), Bindings{}, params, 10).decaying);

  auto tr = integrate(sys, model_params(sys), {{"s", 1}, {"c", 0.2 / 3}}, 0, 100, 1e-2);
  auto rt = transversality_limit(sys, e, tr);
  CHECK(rt.trace.back().first == doctest::Approx(100));
}

TEST_CASE("CSV export") {
  auto sys = model("growth_env");
  auto tr = integrate(sys, model_params(sys), {{"s", 1}, {"c", 0.2}}, 0, 1, 0.5);
  std::ostringstream os;
  write_csv(os, sys, tr);
  std::istringstream is(os.str());
  std::string header, row;
  std::getline(is, header);
  CHECK(header == "t,s,c,p");
  std::getline(is, row);
  CHECK(row.rfind("0,1,0.20000000000000001,", 0) == 0);
  int lines = 1;
  while (std::getline(is, row)) ++lines;
  CHECK(lines == 3);
}
