#pragma once

// Immutable symbolic expressions in canonical form.
//
// Every Expr is built through the smart constructors below (add, mul, pow,
// func, ...), which keep the tree canonical:
//   * sums are flat: a rational constant plus rational multiples of distinct
//     monomials, sorted by a fixed total order;
//   * products are flat: a rational coefficient times base^exponent factors
//     with distinct bases, sorted; exponents may be arbitrary expressions;
//   * products of sums are expanded, and sums raised to small positive
//     integer powers are multiplied out; sums with negative or symbolic
//     exponents stay as factors, normalized so that equal denominators merge;
//   * exp(a)*exp(b) -> exp(a+b), ln(x^a) -> a*ln(x), sqrt(x) -> x^(1/2).
// Non-integer powers are interpreted on the positive reals, so (x*y)^a is
// distributed to x^a*y^a.
//
// Structural equality of canonical forms is exact and cheap (hash first).

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace phm {

using Rational = mpq_class;

// Coefficients and rates are the unknowns introduced by ansatz templates.
// The enumeration order is also the sort order of symbols inside products.
enum class SymbolKind : std::uint8_t { Coefficient, Rate, Parameter, Variable };
enum class FuncKind : std::uint8_t { Exp, Ln, Sin, Cos };

struct Node;
struct Factor;
struct Term;

class Expr {
 public:
  enum class Kind : std::uint8_t { Number, Symbol, FnApp, Func, Mul, Add };

  Expr();  // the constant 0
  Expr(int value);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& value);  // NOLINT(google-explicit-constructor)

  static Expr symbol(const std::string& name, SymbolKind kind);
  static Expr variable(const std::string& name) { return symbol(name, SymbolKind::Variable); }
  static Expr parameter(const std::string& name) { return symbol(name, SymbolKind::Parameter); }

  Kind kind() const;
  bool is_number() const { return kind() == Kind::Number; }
  bool is_symbol() const { return kind() == Kind::Symbol; }
  bool is_add() const { return kind() == Kind::Add; }
  bool is_mul() const { return kind() == Kind::Mul; }
  bool is_func() const { return kind() == Kind::Func; }
  bool is_fn_app() const { return kind() == Kind::FnApp; }
  bool is_func(FuncKind f) const { return is_func() && func_kind() == f; }

  bool is_zero_literal() const;
  bool is_one() const;
  bool is_integer() const;

  // Number
  const Rational& number() const;
  // Symbol, FnApp
  const std::string& name() const;
  SymbolKind symbol_kind() const;
  // Func
  FuncKind func_kind() const;
  const Expr& arg() const;
  // Mul: coefficient * prod(base^exponent)
  const Rational& coeff() const;
  const std::vector<Factor>& factors() const;
  // Add: constant + sum(coeff * monomial)
  const Rational& constant() const;
  const std::vector<Term>& terms() const;
  // FnApp: an undetermined function of named variables with partial
  // derivative orders, e.g. xi_t = FnApp("xi", {t, s}, {1, 0}).
  const std::vector<std::string>& fn_args() const;
  const std::vector<int>& fn_derivs() const;

  // Names of all symbols (and FnApp argument variables) in the tree.
  const std::vector<std::string>& free_symbols() const;
  bool depends_on(const std::string& name) const;
  bool depends_on_any(const std::set<std::string>& names) const;

  std::size_t hash() const;
  std::size_t size() const;  // node count, used for pivot heuristics

  const Node* raw() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend struct Builder;
};

struct Factor {
  Expr base;
  Expr exponent;
};

struct Term {
  Expr monomial;
  Rational coeff;
};

int compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

// Smart constructors.
Expr add(const std::vector<Expr>& args);
Expr mul(const std::vector<Expr>& args);
Expr pow(const Expr& base, const Expr& exponent);
Expr func(FuncKind f, const Expr& arg);
Expr fn_app(const std::string& name, std::vector<std::string> args,
            std::vector<int> derivs);

inline Expr exp(const Expr& a) { return func(FuncKind::Exp, a); }
inline Expr ln(const Expr& a) { return func(FuncKind::Ln, a); }
inline Expr sin(const Expr& a) { return func(FuncKind::Sin, a); }
inline Expr cos(const Expr& a) { return func(FuncKind::Cos, a); }
Expr sqrt(const Expr& a);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }
Expr rat(long num, long den = 1);

// Rebuilds the tree through the smart constructors.
Expr simplify(const Expr& e);

// Exact partial derivative; symbols other than `var` are constants.
Expr differentiate(const Expr& e, const std::string& var);

using Bindings = std::map<std::string, Expr>;
// Simultaneous substitution of symbols by expressions.
Expr substitute(const Expr& e, const Bindings& bindings);

// Combines a rational expression (symbols, integer powers only) into a
// single reduced fraction num/den, expanded. Non-rational subexpressions are
// treated as opaque atoms.
Expr normal(const Expr& e);

// Multiplies through by every sum that occurs with a negative integer
// exponent, then expands. The result vanishes iff `e` does (for generic
// values of the symbols).
Expr clear_denominators(const Expr& e);

// sin(u)^(2k) -> (1 - cos(u)^2)^k.
Expr reduce_trig_squares(const Expr& e);

// Splits a canonical expression into its additive terms (constant included).
std::vector<Expr> additive_terms(const Expr& e);
// Splits a term into multiplicative factors (coefficient as a Number).
std::vector<Expr> multiplicative_factors(const Expr& e);

using Env = std::map<std::string, double>;
double eval_numeric(const Expr& e, const Env& env);

std::string render(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

// True if every leading sign marker is negative, e.g. -x, -2*x + y.
bool has_negative_sign(const Expr& e);

}  // namespace phm
