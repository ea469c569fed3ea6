#include <cmath>

#include "doctest.h"
#include "random_expr.hpp"

#include "phm/analysis.hpp"
#include "phm/errors.hpp"
#include "phm/expr.hpp"
#include "phm/parse.hpp"

using namespace phm;
using phm::test::ExprGenerator;
using phm::test::NumEnv;

namespace {

Expr P(const std::string& s) { return parse_expr(s, ExprGenerator::table()); }

bool close(double a, double b, double rel = 1e-9) { return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)}); }

// Five-point central difference in `var`.
double fd(const Expr& e, NumEnv env, const std::string& var) {
  const double x = env[var];
  const double h = 1e-3 * std::max(1.0, std::fabs(x));
  auto f = [&](double v) {
    env[var] = v;
    return eval_numeric(e, env);
  };
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

}  // namespace

TEST_CASE("parse and render round trip") {
  ExprGenerator gen(42);
  for (int i = 0; i < 1000; ++i) {
    auto r = gen.expr(3);
    CAPTURE(r.text);
    Expr e = P(r.text);
    const std::string s = render(e);
    CAPTURE(s);
    REQUIRE(P(s) == e);
    CHECK(render(P(s)) == s);
  }
}

TEST_CASE("library evaluator matches an independent tree walk") {
  ExprGenerator gen(7);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    auto r = gen.expr(3);
    Expr e = P(r.text);
    NumEnv env = gen.point();
    double want = r.eval(env);
    if (!std::isfinite(want)) continue;
    CAPTURE(r.text);
    CHECK(close(eval_numeric(e, env), want, 1e-8));
    ++checked;
  }
  CHECK(checked >= 990);
}

TEST_CASE("simplification is idempotent") {
  ExprGenerator gen(11);
  for (int i = 0; i < 500; ++i) {
    Expr e = P(gen.expr(3).text);
    CHECK(simplify(simplify(e)) == simplify(e));
  }
}

TEST_CASE("derivatives agree with finite differences") {
  ExprGenerator gen(3);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    auto r = gen.expr(3);
    Expr e = P(r.text);
    Expr d = differentiate(e, "x");
    CAPTURE(r.text);
    CAPTURE(render(d));
    for (int k = 0; k < 20; ++k) {
      NumEnv env = gen.point();
      double exact = eval_numeric(d, env);
      double approx = fd(e, env, "x");
      double err = std::fabs(exact - approx) / std::max(std::fabs(exact), 1e-3);
      worst = std::max(worst, err);
      CHECK(err < 1e-6);
    }
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("differentiation is linear and obeys the product rule") {
  ExprGenerator gen(5);
  for (int i = 0; i < 200; ++i) {
    Expr a = P(gen.expr(2).text), b = P(gen.expr(2).text);
    Rational x(gen.pick(19) - 9, 1 + gen.pick(5)), y(gen.pick(19) - 9, 1 + gen.pick(5));
    Expr lhs = differentiate(Expr(x) * a + Expr(y) * b, "x");
    Expr rhs = Expr(x) * differentiate(a, "x") + Expr(y) * differentiate(b, "x");
    CHECK(lhs == rhs);
  }
  for (int i = 0; i < 500; ++i) {
    Expr a = P(gen.expr(2).text), b = P(gen.expr(2).text);
    Expr r = differentiate(a * b, "x") - (differentiate(a, "x") * b + a * differentiate(b, "x"));
    CAPTURE(render(a));
    CAPTURE(render(b));
    CHECK(is_zero(r) == ZeroVerdict::Zero);
  }
}

TEST_CASE("substitution commutes with evaluation") {
  ExprGenerator gen(13);
  for (int i = 0; i < 200; ++i) {
    Expr e = P(gen.expr(3).text);
    Expr g = P(gen.expr(2).text);
    NumEnv env = gen.point();
    double gv = eval_numeric(g, env);
    NumEnv env2 = env;
    env2["y"] = gv;
    double want;
    try {
      want = eval_numeric(e, env2);
    } catch (const DomainError&) {
      continue;
    }
    CAPTURE(render(e));
    CAPTURE(render(g));
    CHECK(close(eval_numeric(substitute(e, {{"y", g}}), env), want, 1e-8));
  }
  Expr e = P("x*exp(y) + sin(t)");
  CHECK(substitute(e, {{"y", P("y")}}) == e);
}

TEST_CASE("collect_by reconstructs its input") {
  ExprGenerator gen(17);
  for (int i = 0; i < 500; ++i) {
    auto r = gen.separable(1 + gen.pick(4));
    Expr e = P(r.text);
    CAPTURE(r.text);
    Collected groups = collect_by(e, {"p", "c"});
    std::vector<Expr> parts;
    for (const auto& [key, coeff] : groups) parts.push_back(key.monomial() * coeff);
    CHECK(add(parts) == e);
    NumEnv env = gen.point();
    CHECK(close(eval_numeric(e, env), r.eval(env), 1e-8));
  }
  CHECK(collect_by(Expr(), {"p"}).empty());
  CHECK_THROWS_AS(collect_by(P("exp(p*x) + p"), {"p"}), NonSeparable);
}

TEST_CASE("zero testing") {
  CHECK(is_zero(P("x - x")) == ZeroVerdict::Zero);
  CHECK(is_zero(P("sin(t)^2 + cos(t)^2 - 1")) != ZeroVerdict::NonZero);
  CHECK(is_zero(P("x - y")) == ZeroVerdict::NonZero);
}
