#pragma once

// Sparse multivariate polynomials and rational functions over Q.
//
// Variables are small integer ids handed out by an AtomTable, which maps
// them to the expressions they stand for (symbols, or opaque non-rational
// subexpressions such as exp(t) or s^phi).

#include <map>
#include <utility>
#include <vector>

#include "phm/expr.hpp"

namespace phm {

// Sorted by variable id, exponents positive.
using Monomial = std::vector<std::pair<int, int>>;

struct MonomialLess {
  // Lexicographic with the largest variable id most significant.
  bool operator()(const Monomial& a, const Monomial& b) const;
};

class Poly {
 public:
  using Terms = std::map<Monomial, Rational, MonomialLess>;

  Poly() = default;
  Poly(const Rational& c);  // NOLINT(google-explicit-constructor)
  static Poly var(int id, int power = 1);
  static Poly from_terms(Terms terms);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  Rational constant_value() const;  // requires is_constant()

  int degree(int var) const;
  int total_degree() const;
  std::vector<int> variables() const;
  int main_variable() const;  // -1 for constants
  // Coefficients with respect to `var`, keyed by power.
  std::map<int, Poly> coeffs(int var) const;
  Poly leading_coeff(int var) const;
  // Leading term in the lex order.
  std::pair<Monomial, Rational> leading_term() const;

  Poly operator-() const;
  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly pow(unsigned n) const;
  Poly scaled(const Rational& c) const;
  friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  // Exact division; false if b does not divide a.
  static bool divide(const Poly& a, const Poly& b, Poly& quotient);
  static Poly gcd(const Poly& a, const Poly& b);
  // Scaled so the leading term has coefficient 1.
  Poly monic() const;
  // Substitutes `var` by a polynomial.
  Poly compose(int var, const Poly& value) const;

  double eval(const std::vector<double>& values) const;

 private:
  Terms terms_;
};

class RatFunc {
 public:
  RatFunc() = default;
  RatFunc(const Poly& num);  // NOLINT(google-explicit-constructor)
  RatFunc(const Poly& num, const Poly& den);
  RatFunc(const Rational& c) : RatFunc(Poly(c)) {}  // NOLINT(google-explicit-constructor)

  const Poly& num() const { return num_; }
  const Poly& den() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const;

  friend RatFunc operator+(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator-(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator*(const RatFunc& a, const RatFunc& b);
  friend RatFunc operator/(const RatFunc& a, const RatFunc& b);
  RatFunc operator-() const;
  friend bool operator==(const RatFunc& a, const RatFunc& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

 private:
  Poly num_;
  Poly den_ = Poly(1);
};

// Replaces variable `var` by `value`.
RatFunc substitute_var(const RatFunc& r, int var, const RatFunc& value);

// Square root of a polynomial if it is a perfect square.
std::optional<Poly> poly_sqrt(const Poly& p);

// Splits a polynomial into monic factors by pulling out monomial content and
// recursive contents; the last factor of each branch is not split further.
std::vector<Poly> partial_factors(const Poly& p);

// Bidirectional map between polynomial variable ids and expressions.
class AtomTable {
 public:
  int id(const Expr& atom);
  const Expr& atom(int id) const { return atoms_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return atoms_.size(); }
  std::optional<int> find(const Expr& atom) const;

 private:
  std::vector<Expr> atoms_;
  std::map<Expr, int, ExprLess> ids_;
};

// Non-rational pieces (functions, symbolic or fractional powers) become atoms.
RatFunc to_ratfunc(const Expr& e, AtomTable& atoms);
Expr to_expr(const Poly& p, const AtomTable& atoms);
Expr to_expr(const RatFunc& r, const AtomTable& atoms);

}  // namespace phm
