#include "doctest.h"

#include "phm/errors.hpp"
#include "phm/expr.hpp"
#include "phm/parse.hpp"

using namespace phm;

namespace {

SymbolTable table() {
  SymbolTable t;
  for (const char* v : {"t", "q", "p", "s", "c", "x", "y", "q1", "q2", "p1", "p2"}) t.declare(v, SymbolKind::Variable);
  for (const char* v : {"a", "b", "m", "n", "rho", "sigma", "phi", "alpha", "beta", "gamma"})
    t.declare(v, SymbolKind::Parameter);
  return t;
}

Expr P(const std::string& s) { return parse_expr(s, table()); }

}  // namespace

TEST_CASE("canonical arithmetic") {
  CHECK(P("x - x") == Expr());
  CHECK(P("2*x + 3*x") == P("5*x"));
  CHECK(P("x*y") == P("y*x"));
  CHECK(P("x^0") == Expr(1));
  CHECK(P("(x+1)^2") == P("x^2 + 2*x + 1"));
  CHECK(P("exp(a)*exp(b)") == P("exp(a+b)"));
  CHECK(P("ln(x^a)") == P("a*ln(x)"));
  CHECK(P("sqrt(x)^2") == P("x"));
  CHECK(P("(m*phi + m)/(phi + 1)") == P("m"));
  CHECK(P("x^(1-sigma)*x^sigma") == P("x"));
  CHECK(P("0.05") == Expr(Rational(1, 20)));
  CHECK(P("-2^2") == Expr(-4));
  CHECK(P("2^3^2") == Expr(512));
}

TEST_CASE("render") {
  CHECK(render(P("a*p*q - (b/2)*p^2*q")) == "a*p*q - b*p^2*q/2");
  CHECK(render(P("p*s^(-phi)")) == "p/s^phi");
  for (const char* s : {"x/(2*y)", "exp(-rho*t)*p*s", "(1 - sigma)^(-1)*x + 3", "sin(t)^2 + cos(t)"}) {
    Expr e = P(s);
    CHECK(P(render(e)) == e);
    CHECK(render(P(render(e))) == render(e));
  }
}

TEST_CASE("differentiate") {
  CHECK(differentiate(P("-p^2/2 + (gamma/2)*q^2 - q^4/4"), "p") == P("-p"));
  CHECK(differentiate(P("c"), "q") == Expr());
  CHECK(differentiate(P("c^(-sigma)*s^(phi*(1-sigma))"), "s") ==
        P("phi*(1-sigma)*c^(-sigma)*s^(phi*(1-sigma)-1)"));
}

TEST_CASE("normal") {
  CHECK(normal(P("1/(1-sigma) - sigma/(1-sigma)")) == Expr(1));
  CHECK(normal(P("x/(x*y + x)")) == P("1/(y+1)"));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(P("x +"), ParseError);
  CHECK_THROWS_AS(P("zz"), ParseError);
  CHECK_THROWS_AS(P("foo(x)"), ParseError);
}
