#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "phm/expr.hpp"
#include "phm/parse.hpp"

namespace phm::test {

using NumEnv = std::map<std::string, double>;

// Random expression as text plus an evaluator that walks the generator's own
// tree, independent of the library.
struct RandomExpr {
  std::string text;
  std::function<double(const NumEnv&)> eval;
};

class ExprGenerator {
 public:
  explicit ExprGenerator(std::uint64_t seed) : rng_(seed) {}

  static SymbolTable table() {
    SymbolTable t;
    for (const char* v : {"t", "x", "y", "p", "c"}) t.declare(v, SymbolKind::Variable);
    for (const char* v : {"a", "b", "sigma"}) t.declare(v, SymbolKind::Parameter);
    return t;
  }

  // All symbols sampled in [0.5, 2].
  NumEnv point() {
    std::uniform_real_distribution<double> u(0.5, 2.0);
    NumEnv env;
    for (const char* v : {"t", "x", "y", "p", "c", "a", "b", "sigma"}) env[v] = u(rng_);
    return env;
  }

  RandomExpr expr(int depth) {
    if (depth <= 0 || pick(4) == 0) return leaf();
    switch (pick(9)) {
      case 0:
      case 1: return binary(expr(depth - 1), expr(depth - 1), "+", [](double a, double b) { return a + b; });
      case 2: return binary(expr(depth - 1), expr(depth - 1), "-", [](double a, double b) { return a - b; });
      case 3:
      case 4: return binary(expr(depth - 1), expr(depth - 1), "*", [](double a, double b) { return a * b; });
      case 5: {
        // Denominator bounded away from zero.
        RandomExpr d = expr(depth - 1);
        RandomExpr den{"((" + d.text + ")^2 + 1)", [f = d.eval](const NumEnv& e) {
                         double v = f(e);
                         return v * v + 1;
                       }};
        return binary(expr(depth - 1), den, "/", [](double a, double b) { return a / b; });
      }
      case 6: {
        int k = 1 + pick(3);
        RandomExpr b = expr(depth - 1);
        return {"(" + b.text + ")^" + std::to_string(k), [f = b.eval, k](const NumEnv& e) { return std::pow(f(e), k); }};
      }
      case 7: return power_of_symbol();
      default: return function(depth - 1);
    }
  }

  // Sum of terms coefficient * p^i * c^j with coefficients free of p and c.
  RandomExpr separable(int terms) {
    static const std::vector<std::string> exps{"0", "1", "2", "-1", "sigma", "1 - sigma", "-sigma", "a"};
    std::string text;
    std::vector<std::function<double(const NumEnv&)>> parts;
    for (int i = 0; i < terms; ++i) {
      RandomExpr coeff = free_of_separation(2);
      const std::string ep = exps[pick(exps.size())];
      const std::string ec = exps[pick(exps.size())];
      if (i) text += " + ";
      text += "(" + coeff.text + ")*p^(" + ep + ")*c^(" + ec + ")";
      parts.push_back([f = coeff.eval, ep, ec](const NumEnv& e) {
        return f(e) * std::pow(e.at("p"), exponent(ep, e)) * std::pow(e.at("c"), exponent(ec, e));
      });
    }
    return {text, [parts](const NumEnv& e) {
              double s = 0;
              for (const auto& f : parts) s += f(e);
              return s;
            }};
  }

  int pick(std::size_t n) { return static_cast<int>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_)); }

 private:
  static double exponent(const std::string& s, const NumEnv& e) {
    if (s == "sigma") return e.at("sigma");
    if (s == "1 - sigma") return 1 - e.at("sigma");
    if (s == "-sigma") return -e.at("sigma");
    if (s == "a") return e.at("a");
    return std::stod(s);
  }

  RandomExpr free_of_separation(int depth) {
    no_separation_ = true;
    RandomExpr r = expr(depth);
    no_separation_ = false;
    return r;
  }

  std::vector<std::string> symbols(bool with_params) const {
    std::vector<std::string> out{"t", "x", "y"};
    if (!no_separation_) out.insert(out.end(), {"p", "c"});
    if (with_params) out.insert(out.end(), {"a", "b", "sigma"});
    return out;
  }

  RandomExpr leaf() {
    const auto syms = symbols(true);
    if (pick(3) == 0) {
      int n = pick(11) - 5;
      int d = 1 + pick(4);
      double v = static_cast<double>(n) / d;
      return {"(" + std::to_string(n) + "/" + std::to_string(d) + ")", [v](const NumEnv&) { return v; }};
    }
    std::string s = syms[pick(syms.size())];
    return {s, [s](const NumEnv& e) { return e.at(s); }};
  }

  // Positive symbol to a rational or symbolic power.
  RandomExpr power_of_symbol() {
    const auto bases = symbols(false);
    std::string base = bases[pick(bases.size())];
    if (pick(2) == 0) {
      std::string par = pick(2) ? "a" : "sigma";
      return {base + "^" + par, [base, par](const NumEnv& e) { return std::pow(e.at(base), e.at(par)); }};
    }
    int n = pick(7) - 3;
    int d = 1 + pick(2);
    double k = static_cast<double>(n) / d;
    return {base + "^(" + std::to_string(n) + "/" + std::to_string(d) + ")",
            [base, k](const NumEnv& e) { return std::pow(e.at(base), k); }};
  }

  RandomExpr function(int depth) {
    RandomExpr a = expr(depth);
    switch (pick(5)) {
      case 0: {
        // Keeps exponentials of moderate size.
        return {"exp((" + a.text + ")/((" + a.text + ")^2 + 1))", [f = a.eval](const NumEnv& e) {
                  double v = f(e);
                  return std::exp(v / (v * v + 1));
                }};
      }
      case 1:
        return {"ln((" + a.text + ")^2 + 1)", [f = a.eval](const NumEnv& e) {
                  double v = f(e);
                  return std::log(v * v + 1);
                }};
      case 2: return {"sin(" + a.text + ")", [f = a.eval](const NumEnv& e) { return std::sin(f(e)); }};
      case 3: return {"cos(" + a.text + ")", [f = a.eval](const NumEnv& e) { return std::cos(f(e)); }};
      default:
        return {"sqrt((" + a.text + ")^2 + 1)", [f = a.eval](const NumEnv& e) {
                  double v = f(e);
                  return std::sqrt(v * v + 1);
                }};
    }
  }

  static RandomExpr binary(const RandomExpr& l, const RandomExpr& r, const std::string& op,
                           double (*f)(double, double)) {
    return {"(" + l.text + " " + op + " " + r.text + ")",
            [fl = l.eval, fr = r.eval, f](const NumEnv& e) { return f(fl(e), fr(e)); }};
  }

  std::mt19937_64 rng_;
  bool no_separation_ = false;
};

}  // namespace phm::test
