#pragma once

#include <map>
#include <optional>
#include <string>

#include "phm/expr.hpp"

namespace phm {

// Resolves identifiers to symbol kinds. Unknown identifiers are an error
// unless a default kind is given.
struct SymbolTable {
  std::map<std::string, SymbolKind> kinds;
  std::optional<SymbolKind> default_kind;

  void declare(const std::string& name, SymbolKind kind) { kinds[name] = kind; }
  std::optional<SymbolKind> lookup(const std::string& name) const;
};

// Infix grammar: + - * / ^, parentheses, exp ln sin cos sqrt, identifiers,
// decimal literals (read exactly). ^ is right-associative and binds tighter
// than unary minus. Throws ParseError with a byte offset.
Expr parse_expr(const std::string& text, const SymbolTable& table);

// Exact value of a decimal literal such as "0.05" or "1e-3".
Rational parse_decimal(const std::string& text);

}  // namespace phm
