#include <cmath>
#include <map>

#include "expr_node.hpp"
#include "phm/errors.hpp"
#include "phm/expr.hpp"

namespace phm {

namespace {

template <class F>
Expr rebuild(const Expr& e, F&& leaf) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return e;
    case Expr::Kind::Symbol:
    case Expr::Kind::FnApp:
      return leaf(e);
    case Expr::Kind::Func:
      return func(e.func_kind(), rebuild(e.arg(), leaf));
    case Expr::Kind::Mul: {
      std::vector<Expr> parts;
      parts.reserve(e.factors().size() + 1);
      parts.push_back(Expr(e.coeff()));
      for (const auto& f : e.factors())
        parts.push_back(pow(rebuild(f.base, leaf), rebuild(f.exponent, leaf)));
      return mul(parts);
    }
    case Expr::Kind::Add: {
      std::vector<Expr> parts;
      parts.reserve(e.terms().size() + 1);
      parts.push_back(Expr(e.constant()));
      for (const auto& t : e.terms()) parts.push_back(mul({Expr(t.coeff), rebuild(t.monomial, leaf)}));
      return add(parts);
    }
  }
  return e;
}

Expr diff_power(const Expr& base, const Expr& exponent, const std::string& var) {
  const bool base_dep = base.depends_on(var);
  const bool exp_dep = exponent.depends_on(var);
  if (!base_dep && !exp_dep) return Expr();
  if (!exp_dep) {
    return mul({exponent, pow(base, exponent - Expr(1)), differentiate(base, var)});
  }
  Expr inner = differentiate(exponent, var) * ln(base);
  if (base_dep) inner += exponent * differentiate(base, var) / base;
  return pow(base, exponent) * inner;
}

}  // namespace

Expr simplify(const Expr& e) {
  return rebuild(e, [](const Expr& x) { return x; });
}

Expr differentiate(const Expr& e, const std::string& var) {
  if (!e.depends_on(var)) return Expr();
  switch (e.kind()) {
    case Expr::Kind::Number:
      return Expr();
    case Expr::Kind::Symbol:
      return e.name() == var ? Expr(1) : Expr();
    case Expr::Kind::FnApp: {
      std::vector<Expr> parts;
      const auto& args = e.fn_args();
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] != var) continue;
        auto d = e.fn_derivs();
        d[i] += 1;
        parts.push_back(fn_app(e.name(), args, d));
      }
      return add(parts);
    }
    case Expr::Kind::Func: {
      const Expr& u = e.arg();
      Expr du = differentiate(u, var);
      switch (e.func_kind()) {
        case FuncKind::Exp:
          return e * du;
        case FuncKind::Ln:
          return du / u;
        case FuncKind::Sin:
          return cos(u) * du;
        case FuncKind::Cos:
          return -(sin(u) * du);
      }
      return Expr();
    }
    case Expr::Kind::Mul: {
      const auto& fs = e.factors();
      std::vector<Expr> parts;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr d = diff_power(fs[i].base, fs[i].exponent, var);
        if (d.is_zero_literal()) continue;
        std::vector<Factor> others;
        others.reserve(fs.size());
        for (std::size_t j = 0; j < fs.size(); ++j)
          if (j != i) others.push_back(fs[j]);
        parts.push_back(mul({mul_factors(e.coeff(), std::move(others)), d}));
      }
      return add(parts);
    }
    case Expr::Kind::Add: {
      std::vector<Expr> parts;
      for (const auto& t : e.terms())
        if (t.monomial.depends_on(var)) parts.push_back(mul({Expr(t.coeff), differentiate(t.monomial, var)}));
      return add(parts);
    }
  }
  return Expr();
}

Expr substitute(const Expr& e, const Bindings& bindings) {
  if (bindings.empty()) return e;
  bool touched = false;
  for (const auto& s : e.free_symbols())
    if (bindings.count(s)) touched = true;
  if (!touched && e.kind() != Expr::Kind::FnApp) {
    // FnApp names are not free symbols, so look for them explicitly.
    bool has_fn = false;
    std::function<void(const Expr&)> scan = [&](const Expr& x) {
      if (has_fn) return;
      switch (x.kind()) {
        case Expr::Kind::FnApp:
          has_fn = bindings.count(x.name()) > 0;
          break;
        case Expr::Kind::Func:
          scan(x.arg());
          break;
        case Expr::Kind::Mul:
          for (const auto& f : x.factors()) {
            scan(f.base);
            scan(f.exponent);
          }
          break;
        case Expr::Kind::Add:
          for (const auto& t : x.terms()) scan(t.monomial);
          break;
        default:
          break;
      }
    };
    scan(e);
    if (!has_fn) return e;
  }
  return rebuild(e, [&](const Expr& x) -> Expr {
    auto it = bindings.find(x.name());
    if (x.is_symbol()) return it == bindings.end() ? x : it->second;
    // Undetermined function bound to an explicit expression: apply its
    // derivative orders.
    if (it == bindings.end()) {
      bool any = false;
      for (const auto& a : x.fn_args())
        if (bindings.count(a)) any = true;
      if (!any) return x;
      throw SemanticError("cannot substitute into the argument of " + x.name());
    }
    Expr g = it->second;
    for (std::size_t i = 0; i < x.fn_args().size(); ++i)
      for (int k = 0; k < x.fn_derivs()[i]; ++k) g = differentiate(g, x.fn_args()[i]);
    return g;
  });
}

Expr clear_denominators(const Expr& e) {
  std::map<Expr, Rational, ExprLess> dens;
  auto scan = [&](const Expr& m) {
    if (!m.is_mul()) return;
    for (const auto& f : m.factors()) {
      if (f.base.is_add() && f.exponent.is_number() && f.exponent.number() < 0) {
        Rational need = -f.exponent.number();
        auto it = dens.find(f.base);
        if (it == dens.end()) {
          dens.emplace(f.base, need);
        } else if (it->second < need) {
          it->second = need;
        }
      }
    }
  };
  if (e.is_add()) {
    for (const auto& t : e.terms()) scan(t.monomial);
  } else {
    scan(e);
  }
  if (dens.empty()) return e;
  std::vector<Expr> parts{e};
  for (const auto& [base, n] : dens) {
    // Round fractional powers up so every term becomes polynomial in base.
    mpz_class k = n.get_num() / n.get_den();
    if (k * n.get_den() != n.get_num()) k += 1;
    parts.push_back(pow(base, Expr(Rational(k))));
  }
  return mul(parts);
}

Expr reduce_trig_squares(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number:
    case Expr::Kind::Symbol:
    case Expr::Kind::FnApp:
      return e;
    case Expr::Kind::Func:
      return func(e.func_kind(), reduce_trig_squares(e.arg()));
    case Expr::Kind::Mul: {
      std::vector<Expr> parts{Expr(e.coeff())};
      for (const auto& f : e.factors()) {
        Expr base = reduce_trig_squares(f.base);
        if (base.is_func(FuncKind::Sin) && f.exponent.is_integer() && f.exponent.number() >= 2) {
          long k = f.exponent.number().get_num().get_si();
          Expr c2 = pow(cos(base.arg()), Expr(2));
          parts.push_back(pow(Expr(1) - c2, Expr(k / 2)));
          if (k % 2) parts.push_back(base);
          continue;
        }
        parts.push_back(pow(base, reduce_trig_squares(f.exponent)));
      }
      return mul(parts);
    }
    case Expr::Kind::Add: {
      std::vector<Expr> parts{Expr(e.constant())};
      for (const auto& t : e.terms()) parts.push_back(mul({Expr(t.coeff), reduce_trig_squares(t.monomial)}));
      return add(parts);
    }
  }
  return e;
}

double eval_numeric(const Expr& e, const Env& env) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return e.number().get_d();
    case Expr::Kind::Symbol: {
      auto it = env.find(e.name());
      if (it == env.end()) throw SemanticError("unbound symbol '" + e.name() + "'");
      return it->second;
    }
    case Expr::Kind::FnApp:
      throw SemanticError("cannot evaluate undetermined function '" + e.name() + "'");
    case Expr::Kind::Func: {
      double u = eval_numeric(e.arg(), env);
      switch (e.func_kind()) {
        case FuncKind::Exp:
          return std::exp(u);
        case FuncKind::Ln:
          if (!(u > 0)) throw DomainError("ln of a non-positive value");
          return std::log(u);
        case FuncKind::Sin:
          return std::sin(u);
        case FuncKind::Cos:
          return std::cos(u);
      }
      return 0;
    }
    case Expr::Kind::Mul: {
      double v = e.coeff().get_d();
      for (const auto& f : e.factors()) {
        double b = eval_numeric(f.base, env);
        double x;
        if (f.exponent.is_integer() && f.exponent.number().get_num().fits_sint_p()) {
          int n = static_cast<int>(f.exponent.number().get_num().get_si());
          if (b == 0 && n < 0) throw DomainError("0 raised to a negative power");
          x = std::pow(b, n);
        } else {
          double p = eval_numeric(f.exponent, env);
          if (b < 0) throw DomainError("negative base with non-integer exponent");
          if (b == 0 && p < 0) throw DomainError("0 raised to a negative power");
          x = std::pow(b, p);
        }
        v *= x;
      }
      if (!std::isfinite(v)) throw DomainError("non-finite value");
      return v;
    }
    case Expr::Kind::Add: {
      double v = e.constant().get_d();
      for (const auto& t : e.terms()) v += t.coeff.get_d() * eval_numeric(t.monomial, env);
      if (!std::isfinite(v)) throw DomainError("non-finite value");
      return v;
    }
  }
  return 0;
}

}  // namespace phm
