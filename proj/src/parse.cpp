#include "phm/parse.hpp"

#include <cctype>

#include "phm/errors.hpp"

namespace phm {

std::optional<SymbolKind> SymbolTable::lookup(const std::string& name) const {
  auto it = kinds.find(name);
  if (it != kinds.end()) return it->second;
  return default_kind;
}

Rational parse_decimal(const std::string& text) {
  std::size_t i = 0;
  mpz_class digits = 0;
  long scale = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    digits = digits * 10 + (text[i++] - '0');
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      digits = digits * 10 + (text[i++] - '0');
      --scale;
      any = true;
    }
  }
  if (!any) throw ParseError("malformed number '" + text + "'", 0);
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool neg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
    long ex = 0;
    bool exp_digits = false;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      ex = ex * 10 + (text[i++] - '0');
      exp_digits = true;
      if (ex > 10000) throw ParseError("exponent too large in '" + text + "'", 0);
    }
    if (!exp_digits) throw ParseError("malformed number '" + text + "'", 0);
    scale += neg ? -ex : ex;
  }
  if (i != text.size()) throw ParseError("malformed number '" + text + "'", i);
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(scale < 0 ? -scale : scale));
  Rational r = scale < 0 ? Rational(digits, p) : Rational(digits * p);
  r.canonicalize();
  return r;
}

namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
}
bool ident_char(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

class Parser {
 public:
  Parser(const std::string& text, const SymbolTable& table) : s_(text), table_(table) {}

  Expr run() {
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  Expr sum() {
    std::vector<Expr> parts{product()};
    for (;;) {
      if (accept('+')) {
        parts.push_back(product());
      } else if (accept('-')) {
        parts.push_back(-product());
      } else {
        break;
      }
    }
    return add(parts);
  }

  Expr product() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = unary();
        if (d.is_zero_literal()) throw ParseError("division by zero", at);
        e = e / d;
      } else {
        break;
      }
    }
    return e;
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) {
      std::size_t at = pos_;
      Expr ex = unary();
      try {
        return pow(base, ex);
      } catch (const DomainError& err) {
        throw ParseError(err.what(), at);
      }
    }
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (ident_start(c)) return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    try {
      return Expr(parse_decimal(s_.substr(start, pos_ - start)));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), start);
    }
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    skip();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      static const std::map<std::string, int> fns = {{"exp", 0}, {"ln", 1}, {"sin", 2}, {"cos", 3}, {"sqrt", 4}};
      auto it = fns.find(name);
      if (it == fns.end()) throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      Expr a = sum();
      expect(')');
      try {
        switch (it->second) {
          case 0:
            return exp(a);
          case 1:
            return ln(a);
          case 2:
            return sin(a);
          case 3:
            return cos(a);
          default:
            return sqrt(a);
        }
      } catch (const DomainError& err) {
        throw ParseError(err.what(), start);
      }
    }
    auto kind = table_.lookup(name);
    if (!kind) throw ParseError("unknown identifier '" + name + "'", start);
    return Expr::symbol(name, *kind);
  }

  const std::string& s_;
  const SymbolTable& table_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text, const SymbolTable& table) { return Parser(text, table).run(); }

}  // namespace phm
