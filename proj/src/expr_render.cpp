#include <ostream>
#include <sstream>

#include "expr_node.hpp"
#include "phm/expr.hpp"

namespace phm {

namespace {

std::string render_rational(const Rational& q) { return q.get_str(); }

const char* func_name(FuncKind f) {
  switch (f) {
    case FuncKind::Exp:
      return "exp";
    case FuncKind::Ln:
      return "ln";
    case FuncKind::Sin:
      return "sin";
    case FuncKind::Cos:
      return "cos";
  }
  return "?";
}

std::string render_fn_app(const Expr& e) {
  std::string s = e.name();
  bool any = false;
  for (std::size_t i = 0; i < e.fn_args().size(); ++i) {
    for (int k = 0; k < e.fn_derivs()[i]; ++k) {
      s += any ? "" : "_";
      s += e.fn_args()[i];
      any = true;
    }
  }
  return s;
}

std::string render_base(const Expr& b) {
  std::string s = render(b);
  if (b.is_add() || b.is_mul() || (b.is_number() && (b.number() < 0 || b.number().get_den() != 1)))
    return "(" + s + ")";
  return s;
}

std::string render_exponent(const Expr& x) {
  if (x.is_integer() && x.number() >= 0) return render(x);
  if (x.is_symbol()) return x.name();
  return "(" + render(x) + ")";
}

std::string render_power(const Expr& base, const Expr& exponent) {
  if (exponent.is_one()) return render_base(base);
  if (exponent.is_number() && exponent.number() == Rational(1, 2)) return "sqrt(" + render(base) + ")";
  return render_base(base) + "^" + render_exponent(exponent);
}

// Unsigned product body; the caller prints the sign.
std::string render_product(const Rational& coeff_abs, const std::vector<Factor>& factors) {
  std::vector<std::string> num, den;
  bool sum_in_den = false;
  for (const auto& f : factors) {
    // A sum to a power below -1 stays in the numerator: as a denominator it
    // would re-parse as the inverse of the expanded power.
    const bool keep = f.base.is_add() && f.exponent.is_integer() && f.exponent.number() < -1;
    if (has_negative_sign(f.exponent) && !keep) {
      sum_in_den = sum_in_den || f.base.is_add();
      den.push_back(render_power(f.base, -f.exponent));
    } else {
      num.push_back(render_power(f.base, f.exponent));
    }
  }
  std::string s;
  if (coeff_abs.get_den() != 1) den.insert(den.begin(), coeff_abs.get_den().get_str());
  if (coeff_abs.get_num() != 1 || num.empty()) s = coeff_abs.get_num().get_str();
  for (const auto& n : num) {
    if (!s.empty()) s += "*";
    s += n;
  }
  if (!den.empty()) {
    s += "/";
    if (den.size() == 1) {
      s += den.front();
    } else if (sum_in_den) {
      // Chained so that a product of sums is not expanded on re-parse.
      for (std::size_t i = 0; i < den.size(); ++i) s += (i ? "/" : "") + den[i];
    } else {
      std::string d;
      for (const auto& x : den) d += (d.empty() ? "" : "*") + x;
      s += "(" + d + ")";
    }
  }
  return s;
}

std::string render_term(const Expr& monomial, const Rational& coeff_abs) {
  if (monomial.is_mul()) return render_product(coeff_abs * abs(monomial.coeff()), monomial.factors());
  return render_product(coeff_abs, {Factor{monomial, Expr(1)}});
}

}  // namespace

std::string render(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return render_rational(e.number());
    case Expr::Kind::Symbol:
      return e.name();
    case Expr::Kind::FnApp:
      return render_fn_app(e);
    case Expr::Kind::Func:
      return std::string(func_name(e.func_kind())) + "(" + render(e.arg()) + ")";
    case Expr::Kind::Mul: {
      std::string body = render_product(abs(e.coeff()), e.factors());
      return e.coeff() < 0 ? "-" + body : body;
    }
    case Expr::Kind::Add: {
      std::string s;
      const bool constant_first = e.constant() > 0 && e.terms().front().coeff < 0;
      if (constant_first) s = render_rational(e.constant());
      for (const auto& t : e.terms()) {
        Rational c = t.coeff;
        if (t.monomial.is_mul()) c *= t.monomial.coeff();
        std::string body = render_term(t.monomial, abs(t.coeff));
        if (s.empty()) {
          s = c < 0 ? "-" + body : body;
        } else {
          s += c < 0 ? " - " : " + ";
          s += body;
        }
      }
      if (e.constant() != 0 && !constant_first) {
        s += e.constant() < 0 ? " - " : " + ";
        s += render_rational(abs(e.constant()));
      }
      return s;
    }
  }
  return "";
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << render(e); }

}  // namespace phm
