#include "doctest.h"
#include "support.hpp"

#include "phm/determine.hpp"

using namespace phm;
using phm::test::model;
using phm::test::P;
using phm::test::zero;

namespace {

Expr residual(const DeterminingSystem& ds, const Expr& monomial) {
  for (const auto& [k, r] : ds.residuals)
    if (k.monomial() == monomial) return r;
  return Expr();
}

Expr F(const char* name, std::vector<std::string> args, std::vector<int> d) { return fn_app(name, args, d); }

}  // namespace

TEST_CASE("Duffing determining system") {
  auto sys = model("duffing_vdp");
  auto ds = separate(sys, determining_expression(sys, generic_candidate(sys)));
  REQUIRE(ds.residuals.size() == 4);
  std::vector<std::string> tq{"t", "q"};
  Expr xi = F("xi", tq, {0, 0}), xi_t = F("xi", tq, {1, 0}), xi_q = F("xi", tq, {0, 1});
  Expr eta = F("eta", tq, {0, 0}), eta_t = F("eta", tq, {1, 0}), eta_q = F("eta", tq, {0, 1});
  Expr B_t = F("B", tq, {1, 0}), B_q = F("B", tq, {0, 1});
  Expr q = P(sys, "q"), p = P(sys, "p");
  Expr a = P(sys, "alpha"), b = P(sys, "beta"), g = P(sys, "gamma");
  Expr w = g * q * q / 2 - pow(q, 4) / 4;
  // Each residual is a constant multiple of the corresponding equation.
  auto proportional = [](const Expr& x, const Expr& y) {
    Expr r = normal(x / y);
    return r.is_number() && !r.is_zero_literal();
  };
  CHECK(proportional(residual(ds, pow(p, 3)), xi_q));
  CHECK(proportional(residual(ds, pow(p, 2)), -eta_q + xi_t / 2 - xi * (a + b * q * q)));
  CHECK(proportional(residual(ds, p), eta_t + xi_q * w + B_q - eta * (a + b * q * q)));
  CHECK(proportional(residual(ds, Expr(1)), B_t + eta * (g * q - pow(q, 3)) + xi_t * w));
  CHECK(ds.reconstruct() == determining_expression(sys, generic_candidate(sys)));
}

TEST_CASE("Lotka-Volterra determining system") {
  auto sys = model("lotka_volterra");
  auto ds = separate(sys, determining_expression(sys, generic_candidate(sys)));
  REQUIRE(ds.residuals.size() == 4);
  std::vector<std::string> tq{"t", "q"};
  Expr xi = F("xi", tq, {0, 0}), xi_q = F("xi", tq, {0, 1});
  Expr B_t = F("B", tq, {1, 0}), B_q = F("B", tq, {0, 1});
  Expr q = P(sys, "q"), p = P(sys, "p");
  // p^3: a multiple of q xi_q + xi.
  CHECK(normal(residual(ds, pow(p, 3)) / (q * xi_q + xi)) == P(sys, "-b^2*q/2"));
  // p^0: the transport equation B_t + a q B_q = 0.
  CHECK(residual(ds, Expr(1)) == -(B_t + P(sys, "a") * q * B_q));
}

TEST_CASE("growth determining system separates by powers of c") {
  auto sys = model("growth_env");
  auto cand = generic_candidate(sys);
  auto ds = separate(sys, determining_expression(sys, cand));
  CHECK(ds.residuals.size() == 5);
  Expr c = P(sys, "c");
  Expr sigma = P(sys, "sigma");
  std::vector<std::string> ts{"t", "s"};
  Expr xi = F("xi", ts, {0, 0}), xi_t = F("xi", ts, {1, 0}), xi_s = F("xi", ts, {0, 1});
  Expr eta = F("eta", ts, {0, 0}), eta_s = F("eta", ts, {0, 1});
  Expr s = P(sys, "s");
  Expr phi = P(sys, "phi"), rho = P(sys, "rho");
  Expr ratio = normal(residual(ds, pow(c, Expr(2) - sigma)) / (xi_s * pow(s, phi * (Expr(1) - sigma))));
  CHECK(ratio == P(sys, "sigma/(1 - sigma)"));
  CHECK(residual(ds, c) == F("B", ts, {0, 1}));
  CHECK(residual(ds, Expr(1)) == -(F("B", ts, {1, 0}) + P(sys, "m*s") * F("B", ts, {0, 1})));

  // With xi_s = 0 imposed, the c^(1-sigma) line.
  cand.xi = F("xi", {"t"}, {0});
  auto ds2 = separate(sys, determining_expression(sys, cand));
  Expr r = residual(ds2, pow(c, Expr(1) - sigma));
  Expr xt = F("xi", {"t"}, {1});
  Expr expected = eta_s + phi * F("eta", ts, {0, 0}) / s + sigma / (Expr(1) - sigma) * xt - rho * F("xi", {"t"}, {0});
  CHECK(normal(r / pow(s, phi * (Expr(1) - sigma)) + expected) == Expr());
}

TEST_CASE("reference operators verify") {
  SUBCASE("Duffing") {
    auto sys = model("duffing_vdp");
    ConstraintSet cs;
    cs.add(P(sys, "beta^2*gamma + 3*alpha*beta - 9"));
    SymmetryCandidate x1{P(sys, "exp(6*t/beta)"),
                         {{"q", P(sys, "-q/(3*beta)*(beta^2*q^2 + 3*alpha*beta - 9)*exp(6*t/beta)")}},
                         P(sys, "-q^2/(18*beta^2)*(beta^4*q^4 + (6*alpha*beta^3 - 45/2*beta^2)*q^2 + 9*alpha^2*beta^2 - "
                                "81*alpha*beta + 162)*exp(6*t/beta)")};
    SymmetryCandidate x2{Expr(), {{"q", P(sys, "exp(3*t/beta)")}},
                         P(sys, "q/(3*beta)*(beta^2*q^2 + 3*alpha*beta - 9)*exp(3*t/beta)")};
    CHECK(verify_candidate(sys, x1, cs).pass);
    CHECK(verify_candidate(sys, x2, cs).pass);
    CHECK_FALSE(verify_candidate(sys, x1, ConstraintSet{}).pass);
    // Without the factor 1/3 in eta of X1, or with 3*alpha*beta^2 in B of X2, verification fails.
    SymmetryCandidate x1_variant = x1;
    x1_variant.eta["q"] = P(sys, "-q/beta*(beta^2*q^2 + 3*alpha*beta - 9)*exp(6*t/beta)");
    CHECK_FALSE(verify_candidate(sys, x1_variant, cs).pass);
    SymmetryCandidate x2_variant = x2;
    x2_variant.B = P(sys, "q/(3*beta)*(beta^2*q^2 + 3*alpha*beta^2 - 9)*exp(3*t/beta)");
    CHECK_FALSE(verify_candidate(sys, x2_variant, cs).pass);
  }
  SUBCASE("Lotka-Volterra") {
    auto sys = model("lotka_volterra");
    ConstraintSet cs;
    cs.add(P(sys, "a + m"));
    SymmetryCandidate x1{P(sys, "exp(-2*a*t)/q"), {{"q", P(sys, "(a + n*q)*exp(-2*a*t)")}},
                         P(sys, "-n^2*q^2/(2*b)*exp(-2*a*t)")};
    SymmetryCandidate x2{Expr(), {{"q", P(sys, "-exp(-a*t)/a")}}, P(sys, "n*q/(a*b)*exp(-a*t)")};
    CHECK(verify_candidate(sys, x1, cs).pass);
    CHECK(verify_candidate(sys, x2, cs).pass);
    auto rep = verify_candidate(sys, x2, ConstraintSet{});
    CHECK_FALSE(rep.pass);
  }
  SUBCASE("harmonic time translation") {
    auto sys = model("harmonic");
    CHECK(verify_candidate(sys, SymmetryCandidate{Expr(1), {{"q", Expr()}}, Expr()}, ConstraintSet{}).pass);
  }
}

TEST_CASE("linearity in the candidate") {
  auto sys = model("duffing_vdp");
  SymmetryCandidate a{P(sys, "t*q"), {{"q", P(sys, "q^3 + exp(t)")}}, P(sys, "q^2*t")};
  SymmetryCandidate b{P(sys, "exp(2*t)"), {{"q", P(sys, "sin(t)*q")}}, P(sys, "ln(q)")};
  CHECK(determining_expression(sys, a + b) == determining_expression(sys, a) + determining_expression(sys, b));
}
