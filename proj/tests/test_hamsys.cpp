#include "doctest.h"
#include "support.hpp"

#include "phm/errors.hpp"

using namespace phm;
using phm::test::model;
using phm::test::P;
using phm::test::zero;

namespace {

Expr rhs(const std::vector<MotionEquation>& eqs, const std::string& v) {
  for (const auto& e : eqs)
    if (e.var == v) return e.rhs;
  FAIL("no equation for " << v);
  return Expr();
}

}  // namespace

TEST_CASE("mechanical equations of motion") {
  auto sys = model("mechanical");
  auto eqs = equations_of_motion(sys);
  CHECK(rhs(eqs, "q1") == P(sys, "p1"));
  CHECK(rhs(eqs, "q2") == P(sys, "p2"));
  CHECK(rhs(eqs, "p1") == P(sys, "-p2"));
  CHECK(rhs(eqs, "p2") == P(sys, "-q2"));
  CHECK(zero(sys, total_derivative_on_shell(sys, P(sys, "q2*cos(t) - p2*sin(t)"))));
  CHECK(total_derivative_on_shell(sys, P(sys, "t")) == Expr(1));
}

TEST_CASE("harmonic oscillator conserves energy") {
  auto sys = model("harmonic");
  auto eqs = equations_of_motion(sys);
  CHECK(rhs(eqs, "q") == P(sys, "p"));
  CHECK(rhs(eqs, "p") == P(sys, "-q"));
  CHECK(total_derivative_on_shell(sys, sys.H) == Expr());
}

TEST_CASE("Lotka-Volterra and Duffing right-hand sides") {
  auto lv = model("lotka_volterra");
  auto eqs = equations_of_motion(lv);
  CHECK(rhs(eqs, "q") == P(lv, "a*q - b*p*q"));
  CHECK(rhs(eqs, "p") == P(lv, "-m*p + n*p*q"));

  auto duff = model("duffing_vdp");
  eqs = equations_of_motion(duff);
  CHECK(rhs(eqs, "q") == P(duff, "-p"));
  CHECK(rhs(eqs, "p") == P(duff, "-gamma*q + q^3 - (alpha + beta*q^2)*p"));
}

TEST_CASE("growth model control elimination") {
  auto sys = model("growth_env");
  auto raw = raw_equations_of_motion(sys);
  Expr pdot = eliminate_controls(sys, rhs(raw, "p"));
  Expr p = sys.controls[0].relation;
  CHECK(zero(sys, pdot - P(sys, "rho - m - phi*c/s") * p));

  auto eqs = equations_of_motion(sys);
  CHECK(rhs(eqs, "s") == P(sys, "m*s - c"));
  Expr cdot = rhs(eqs, "c");
  CHECK(zero(sys, cdot / P(sys, "c") - P(sys, "phi*(1/sigma - 1)*m + phi*c/s + (m - rho)/sigma")));
}

TEST_CASE("derivation property of the total derivative") {
  auto sys = model("lotka_volterra");
  Expr a = P(sys, "q^2*p + exp(a*t)");
  Expr b = P(sys, "ln(q)*p - t");
  Expr lhs = total_derivative_on_shell(sys, a * b);
  Expr r = total_derivative_on_shell(sys, a) * b + a * total_derivative_on_shell(sys, b);
  CHECK(lhs - r == Expr());
}

TEST_CASE("model validation") {
  CHECK_THROWS_AS(parse_model("model x\nH = 1\n"), SemanticError);
  CHECK_THROWS_AS(parse_model("model x\npair (q, p)\npair (q, r)\nH = p\n"), SemanticError);
  CHECK_THROWS_AS(parse_model("model x\npair (q, p)\nH = p*z\n"), ParseError);
  try {
    parse_model("model x\npair (q, p)\nH = p +* q\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column == 8);
  }
}

TEST_CASE("model files round-trip through the renderer") {
  for (const char* name : {"growth_env", "mechanical", "duffing_vdp", "lotka_volterra", "harmonic"}) {
    auto sys = model(name);
    auto again = parse_model(render_model(sys));
    CHECK_MESSAGE(same_model(sys, again), std::string(name));
  }
}

TEST_CASE("constraint solving prefers later parameters") {
  auto duff = model("duffing_vdp");
  ConstraintSet cs;
  cs.add(P(duff, "beta^2*gamma + 3*alpha*beta - 9"));
  auto b = cs.solve(duff.param_names());
  REQUIRE(b.count("gamma"));
  CHECK(b.at("gamma") == P(duff, "(9 - 3*alpha*beta)/beta^2"));

  auto lv = model("lotka_volterra");
  ConstraintSet c2;
  c2.add(P(lv, "a + m"));
  CHECK(c2.solve(lv.param_names()).at("m") == P(lv, "-a"));
  CHECK_FALSE(c2.add(P(lv, "-2*a - 2*m")));
}
