#pragma once

// Private node layout shared by the expression translation units.

#include <string>
#include <vector>

#include "phm/expr.hpp"

namespace phm {

struct Node {
  Expr::Kind kind = Expr::Kind::Number;
  std::size_t hash = 0;
  std::size_t size = 1;
  Rational num;  // Number value, Mul coefficient, Add constant
  std::string name;
  SymbolKind skind = SymbolKind::Variable;
  FuncKind fkind = FuncKind::Exp;
  std::vector<Expr> args;  // Func argument
  std::vector<Factor> factors;
  std::vector<Term> terms;
  std::vector<std::string> fn_args;
  std::vector<int> fn_derivs;
  std::vector<std::string> symbols;  // sorted, unique
};

// Raw constructors: the caller guarantees canonical input.
struct Builder {
  static Expr number(const Rational& q);
  static Expr symbol(const std::string& name, SymbolKind kind);
  static Expr fn_app(const std::string& name, std::vector<std::string> args,
                     std::vector<int> derivs);
  static Expr func(FuncKind f, const Expr& arg);
  static Expr mul(const Rational& coeff, std::vector<Factor> factors);
  static Expr add(const Rational& constant, std::vector<Term> terms);
  static const Node& node(const Expr& e) { return *e.node_; }
};

// Canonical product of a coefficient and a list of factors.
Expr mul_factors(Rational coeff, std::vector<Factor> factors);

bool has_add_denominator(const Expr& e);

}  // namespace phm
