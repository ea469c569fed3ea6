#include "phm/expr.hpp"

#include <algorithm>
#include <cassert>

#include "expr_node.hpp"
#include "phm/errors.hpp"

namespace phm {

namespace {

std::size_t hash_combine(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

std::size_t hash_mpz(const mpz_class& z) {
  const auto* p = z.get_mpz_t();
  std::size_t h = mpz_size(p) ? static_cast<std::size_t>(mpz_getlimbn(p, 0)) : 0;
  return hash_combine(h, static_cast<std::size_t>(mpz_sgn(p) + 2));
}

std::size_t hash_rational(const Rational& q) {
  return hash_combine(hash_mpz(q.get_num()), hash_mpz(q.get_den()));
}

void merge_symbols(std::vector<std::string>& into, const std::vector<std::string>& from) {
  if (from.empty()) return;
  std::vector<std::string> out;
  out.reserve(into.size() + from.size());
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(out));
  into.swap(out);
}

int cmp_rational(const Rational& a, const Rational& b) {
  int c = cmp(a, b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

template <class T>
int cmp_value(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

const std::shared_ptr<const Node>& zero_node() {
  static const std::shared_ptr<const Node> zero = [] {
    auto n = std::make_shared<Node>();
    n->kind = Expr::Kind::Number;
    n->num = 0;
    n->hash = hash_combine(0, hash_rational(n->num));
    return n;
  }();
  return zero;
}

}  // namespace

// ---------------------------------------------------------------------------
// Raw node construction

Expr Builder::number(const Rational& q) {
  if (q == 0) return Expr();
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::Number;
  n->num = q;
  n->hash = hash_combine(0, hash_rational(q));
  return Expr(std::move(n));
}

Expr Builder::symbol(const std::string& name, SymbolKind kind) {
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::Symbol;
  n->name = name;
  n->skind = kind;
  n->hash = hash_combine(hash_combine(1, std::hash<std::string>{}(name)),
                         static_cast<std::size_t>(kind));
  n->symbols = {name};
  return Expr(std::move(n));
}

Expr Builder::fn_app(const std::string& name, std::vector<std::string> args,
                     std::vector<int> derivs) {
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::FnApp;
  n->name = name;
  std::size_t h = hash_combine(2, std::hash<std::string>{}(name));
  for (const auto& a : args) h = hash_combine(h, std::hash<std::string>{}(a));
  for (int d : derivs) h = hash_combine(h, static_cast<std::size_t>(d));
  n->hash = h;
  n->symbols = args;
  std::sort(n->symbols.begin(), n->symbols.end());
  n->symbols.erase(std::unique(n->symbols.begin(), n->symbols.end()), n->symbols.end());
  n->fn_args = std::move(args);
  n->fn_derivs = std::move(derivs);
  return Expr(std::move(n));
}

Expr Builder::func(FuncKind f, const Expr& arg) {
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::Func;
  n->fkind = f;
  n->args = {arg};
  n->hash = hash_combine(hash_combine(3, static_cast<std::size_t>(f)), arg.hash());
  n->size = 1 + arg.size();
  n->symbols = arg.free_symbols();
  return Expr(std::move(n));
}

Expr Builder::mul(const Rational& coeff, std::vector<Factor> factors) {
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::Mul;
  n->num = coeff;
  std::size_t h = hash_combine(4, hash_rational(coeff));
  for (const auto& f : factors) {
    h = hash_combine(hash_combine(h, f.base.hash()), f.exponent.hash());
    n->size += f.base.size() + f.exponent.size();
    merge_symbols(n->symbols, f.base.free_symbols());
    merge_symbols(n->symbols, f.exponent.free_symbols());
  }
  n->hash = h;
  n->factors = std::move(factors);
  return Expr(std::move(n));
}

Expr Builder::add(const Rational& constant, std::vector<Term> terms) {
  auto n = std::make_shared<Node>();
  n->kind = Expr::Kind::Add;
  n->num = constant;
  std::size_t h = hash_combine(5, hash_rational(constant));
  for (const auto& t : terms) {
    h = hash_combine(hash_combine(h, t.monomial.hash()), hash_rational(t.coeff));
    n->size += 1 + t.monomial.size();
    merge_symbols(n->symbols, t.monomial.free_symbols());
  }
  n->hash = h;
  n->terms = std::move(terms);
  return Expr(std::move(n));
}

// ---------------------------------------------------------------------------
// Accessors

Expr::Expr() : node_(zero_node()) {}
Expr::Expr(int value) : Expr(Rational(value)) {}
Expr::Expr(const Rational& value) : node_(Builder::number(value).node_) {}

Expr Expr::symbol(const std::string& name, SymbolKind kind) { return Builder::symbol(name, kind); }

Expr::Kind Expr::kind() const { return node_->kind; }
bool Expr::is_zero_literal() const { return is_number() && node_->num == 0; }
bool Expr::is_one() const { return is_number() && node_->num == 1; }
bool Expr::is_integer() const { return is_number() && node_->num.get_den() == 1; }
const Rational& Expr::number() const { return node_->num; }
const std::string& Expr::name() const { return node_->name; }
SymbolKind Expr::symbol_kind() const { return node_->skind; }
FuncKind Expr::func_kind() const { return node_->fkind; }
const Expr& Expr::arg() const { return node_->args.front(); }
const Rational& Expr::coeff() const { return node_->num; }
const std::vector<Factor>& Expr::factors() const { return node_->factors; }
const Rational& Expr::constant() const { return node_->num; }
const std::vector<Term>& Expr::terms() const { return node_->terms; }
const std::vector<std::string>& Expr::fn_args() const { return node_->fn_args; }
const std::vector<int>& Expr::fn_derivs() const { return node_->fn_derivs; }
const std::vector<std::string>& Expr::free_symbols() const { return node_->symbols; }
std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::size() const { return node_->size; }

bool Expr::depends_on(const std::string& name) const {
  const auto& s = node_->symbols;
  return std::binary_search(s.begin(), s.end(), name);
}

bool Expr::depends_on_any(const std::set<std::string>& names) const {
  for (const auto& s : node_->symbols)
    if (names.count(s)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Total order

int compare(const Expr& a, const Expr& b) {
  if (a.raw() == b.raw()) return 0;
  if (a.kind() != b.kind()) return cmp_value(static_cast<int>(a.kind()), static_cast<int>(b.kind()));
  switch (a.kind()) {
    case Expr::Kind::Number:
      return cmp_rational(a.number(), b.number());
    case Expr::Kind::Symbol:
      if (a.symbol_kind() != b.symbol_kind())
        return cmp_value(static_cast<int>(a.symbol_kind()), static_cast<int>(b.symbol_kind()));
      return cmp_value(a.name(), b.name());
    case Expr::Kind::FnApp:
      if (int c = cmp_value(a.name(), b.name())) return c;
      if (int c = cmp_value(a.fn_args(), b.fn_args())) return c;
      return cmp_value(a.fn_derivs(), b.fn_derivs());
    case Expr::Kind::Func:
      if (a.func_kind() != b.func_kind())
        return cmp_value(static_cast<int>(a.func_kind()), static_cast<int>(b.func_kind()));
      return compare(a.arg(), b.arg());
    case Expr::Kind::Mul: {
      const auto& fa = a.factors();
      const auto& fb = b.factors();
      std::size_t n = std::min(fa.size(), fb.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare(fa[i].base, fb[i].base)) return c;
        if (int c = compare(fa[i].exponent, fb[i].exponent)) return c;
      }
      if (fa.size() != fb.size()) return cmp_value(fa.size(), fb.size());
      return cmp_rational(a.coeff(), b.coeff());
    }
    case Expr::Kind::Add: {
      const auto& ta = a.terms();
      const auto& tb = b.terms();
      std::size_t n = std::min(ta.size(), tb.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (int c = compare(ta[i].monomial, tb[i].monomial)) return c;
        if (int c = cmp_rational(ta[i].coeff, tb[i].coeff)) return c;
      }
      if (ta.size() != tb.size()) return cmp_value(ta.size(), tb.size());
      return cmp_rational(a.constant(), b.constant());
    }
  }
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.raw() == b.raw()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

// ---------------------------------------------------------------------------
// Canonicalizing constructors

namespace {

// coeff * monomial where the monomial has unit coefficient.
Expr scaled(const Expr& m, const Rational& c) {
  if (c == 0) return Expr();
  if (c == 1) return m;
  if (m.is_mul()) return Builder::mul(c * m.coeff(), m.factors());
  return Builder::mul(c, {Factor{m, Expr(1)}});
}

std::pair<Rational, Expr> split_coeff(const Expr& e) {
  if (e.is_mul() && e.coeff() != 1) {
    const auto& fs = e.factors();
    if (fs.size() == 1 && fs[0].exponent.is_one()) return {e.coeff(), fs[0].base};
    return {e.coeff(), Builder::mul(1, fs)};
  }
  return {Rational(1), e};
}

Expr build_add(const Rational& constant, std::vector<Term> acc) {
  std::sort(acc.begin(), acc.end(),
            [](const Term& x, const Term& y) { return compare(x.monomial, y.monomial) < 0; });
  std::vector<Term> merged;
  merged.reserve(acc.size());
  for (auto& t : acc) {
    if (!merged.empty() && merged.back().monomial == t.monomial) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(std::move(t));
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Term& t) { return t.coeff == 0; }),
               merged.end());
  if (merged.empty()) return Expr(constant);
  if (merged.size() == 1 && constant == 0) return scaled(merged[0].monomial, merged[0].coeff);
  return Builder::add(constant, std::move(merged));
}

Rational rational_ipow(const Rational& base, long n) {
  if (n == 0) return 1;
  if (base == 0) {
    if (n < 0) throw DomainError("0 raised to a negative power");
    return 0;
  }
  unsigned long k = static_cast<unsigned long>(n < 0 ? -n : n);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), k);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), k);
  Rational r(num, den);
  r.canonicalize();
  if (n < 0) r = 1 / r;
  return r;
}

bool fits_long(const Rational& q) { return q.get_den() == 1 && q.get_num().fits_slong_p(); }

// Exact value of base^exponent for rationals, if it is rational.
std::optional<Rational> rational_pow(const Rational& base, const Rational& exponent) {
  if (exponent.get_den() == 1) {
    if (!fits_long(exponent)) return std::nullopt;
    return rational_ipow(base, exponent.get_num().get_si());
  }
  if (base == 0) {
    if (exponent < 0) throw DomainError("0 raised to a negative power");
    return Rational(0);
  }
  if (base == 1) return Rational(1);
  if (base < 0 || !exponent.get_den().fits_ulong_p() || !exponent.get_num().fits_slong_p())
    return std::nullopt;
  unsigned long q = exponent.get_den().get_ui();
  mpz_class rn, rd;
  if (!mpz_root(rn.get_mpz_t(), base.get_num_mpz_t(), q)) return std::nullopt;
  if (!mpz_root(rd.get_mpz_t(), base.get_den_mpz_t(), q)) return std::nullopt;
  Rational root(rn, rd);
  root.canonicalize();
  return rational_ipow(root, exponent.get_num().get_si());
}

std::vector<Factor> monomial_factors(const Expr& m) {
  if (m.is_mul()) return m.factors();
  if (m.is_number()) return {};
  return {Factor{m, Expr(1)}};
}

struct AddContent {
  Rational scale;
  std::vector<Factor> content;
  Expr primitive;
};

// Writes a sum as scale * content * primitive, where the primitive part has
// leading coefficient 1 and no monomial factor common to all its terms.
AddContent add_content(const Expr& a) {
  assert(a.is_add());
  const auto& terms = a.terms();
  Rational scale = terms.front().coeff;
  std::vector<Factor> content;
  if (a.constant() == 0) {
    content = monomial_factors(terms.front().monomial);
    for (std::size_t i = 1; i < terms.size() && !content.empty(); ++i) {
      auto other = monomial_factors(terms[i].monomial);
      std::vector<Factor> kept;
      for (const auto& f : content) {
        auto it = std::find_if(other.begin(), other.end(),
                               [&](const Factor& g) { return g.base == f.base; });
        if (it == other.end()) continue;
        if (f.exponent == it->exponent) {
          kept.push_back(f);
          continue;
        }
        Expr d = add({f.exponent, mul({Expr(-1), it->exponent})});
        if (d.is_number()) kept.push_back(d.number() < 0 ? f : *it);
      }
      content.swap(kept);
    }
  }
  if (scale == 1 && content.empty()) return {scale, {}, a};
  std::vector<Expr> prim;
  prim.reserve(terms.size() + 1);
  for (const auto& t : terms) {
    Expr m = t.monomial;
    if (!content.empty()) {
      std::vector<Factor> fs = m.is_mul() ? m.factors() : std::vector<Factor>{Factor{m, Expr(1)}};
      for (const auto& c : content) {
        for (auto& f : fs) {
          if (f.base == c.base) {
            f.exponent = add({f.exponent, mul({Expr(-1), c.exponent})});
            break;
          }
        }
      }
      fs.erase(std::remove_if(fs.begin(), fs.end(), [](const Factor& f) { return f.exponent.is_zero_literal(); }),
               fs.end());
      m = mul_factors(1, std::move(fs));
    }
    prim.push_back(mul({Expr(t.coeff / scale), m}));
  }
  prim.push_back(Expr(a.constant() / scale));
  Expr primitive = add(prim);
  return {scale, std::move(content), primitive};
}

Expr build_mul_raw(const Rational& coeff, std::vector<Factor> fs) {
  if (coeff == 0) return Expr();
  if (fs.empty()) return Expr(coeff);
  if (coeff == 1 && fs.size() == 1 && fs[0].exponent.is_one()) return fs[0].base;
  return Builder::mul(coeff, std::move(fs));
}

}  // namespace

bool has_add_denominator(const Expr& e) {
  auto check_term = [](const Expr& m) {
    if (!m.is_mul()) return false;
    for (const auto& f : m.factors())
      if (f.base.is_add() && f.exponent.is_number() && f.exponent.number() < 0) return true;
    return false;
  };
  if (e.is_add()) {
    for (const auto& t : e.terms())
      if (check_term(t.monomial)) return true;
    return false;
  }
  return check_term(e);
}

namespace {

Expr canonical_exponent(const Expr& e) {
  if (!e.is_number() && has_add_denominator(e)) return normal(e);
  return e;
}

}  // namespace

Expr mul_factors(Rational coeff, std::vector<Factor> fs) {
  if (coeff == 0) return Expr();

  // Flatten numbers and products appearing as bases with unit exponent.
  std::vector<Factor> work;
  work.reserve(fs.size());
  for (auto& f : fs) {
    if (f.exponent.is_zero_literal()) continue;
    if (f.base.is_number() && f.exponent.is_number()) {
      if (auto v = rational_pow(f.base.number(), f.exponent.number())) {
        coeff *= *v;
        if (coeff == 0) return Expr();
        continue;
      }
    }
    if (f.base.is_mul() && f.exponent.is_one()) {
      coeff *= f.base.coeff();
      for (const auto& g : f.base.factors()) work.push_back(g);
      continue;
    }
    work.push_back(std::move(f));
  }

  // Normalize sums under integer exponents so equal denominators merge.
  for (std::size_t i = 0; i < work.size(); ++i) {
    Factor& f = work[i];
    if (!f.base.is_add() || !f.exponent.is_integer()) continue;
    AddContent ac = add_content(f.base);
    if (ac.scale == 1 && ac.content.empty()) continue;
    const Rational n = f.exponent.number();
    coeff *= rational_ipow(ac.scale, n.get_num().get_si());
    f.base = ac.primitive;
    for (const auto& c : ac.content) work.push_back({c.base, mul({c.exponent, Expr(n)})});
  }

  // exp(a)^k * exp(b) -> exp(k*a + b)
  {
    std::vector<Expr> exp_args;
    std::vector<Factor> rest;
    for (auto& f : work) {
      if (f.base.is_func(FuncKind::Exp)) {
        exp_args.push_back(mul({f.base.arg(), f.exponent}));
      } else {
        rest.push_back(std::move(f));
      }
    }
    if (!exp_args.empty()) {
      Expr merged = exp(add(exp_args));
      if (merged.is_func(FuncKind::Exp)) {
        rest.push_back({merged, Expr(1)});
      } else if (merged.is_number()) {
        coeff *= merged.number();
      } else {
        rest.push_back({merged, Expr(1)});
        return mul_factors(coeff, std::move(rest));
      }
    }
    work.swap(rest);
  }

  // Merge equal bases.
  std::sort(work.begin(), work.end(),
            [](const Factor& x, const Factor& y) { return compare(x.base, y.base) < 0; });
  std::vector<Factor> merged;
  merged.reserve(work.size());
  for (auto& f : work) {
    if (!merged.empty() && merged.back().base == f.base) {
      merged.back().exponent = add({merged.back().exponent, f.exponent});
    } else {
      merged.push_back(std::move(f));
    }
  }

  std::vector<Factor> out;
  std::vector<Factor> to_expand;
  bool renormalize = false;
  for (auto& f : merged) {
    f.exponent = canonical_exponent(f.exponent);
    if (f.exponent.is_zero_literal()) continue;
    if (f.base.is_number()) {
      if (f.base.is_one()) continue;
      if (f.exponent.is_number()) {
        if (auto v = rational_pow(f.base.number(), f.exponent.number())) {
          coeff *= *v;
          continue;
        }
      }
    }
    if (f.base.is_add() && f.exponent.is_integer() && f.exponent.number() > 0) {
      to_expand.push_back(std::move(f));
      continue;
    }
    if (f.base.is_mul() && f.exponent.is_one()) renormalize = true;
    out.push_back(std::move(f));
  }
  if (coeff == 0) return Expr();
  if (renormalize) return mul_factors(coeff, std::move(out));

  if (to_expand.empty()) return build_mul_raw(coeff, std::move(out));

  // Distribute over sums.
  std::vector<Expr> current{build_mul_raw(coeff, std::move(out))};
  for (const auto& f : to_expand) {
    long n = f.exponent.number().get_num().get_si();
    std::vector<Expr> parts = additive_terms(f.base);
    for (long k = 0; k < n; ++k) {
      std::vector<Expr> next;
      next.reserve(current.size() * parts.size());
      for (const auto& c : current)
        for (const auto& p : parts) next.push_back(mul({c, p}));
      current = additive_terms(add(next));
    }
  }
  return add(current);
}

Expr add(const std::vector<Expr>& args) {
  Rational constant = 0;
  std::vector<Term> acc;
  for (const auto& a : args) {
    switch (a.kind()) {
      case Expr::Kind::Number:
        constant += a.number();
        break;
      case Expr::Kind::Add:
        constant += a.constant();
        acc.insert(acc.end(), a.terms().begin(), a.terms().end());
        break;
      default: {
        auto [c, m] = split_coeff(a);
        acc.push_back({m, c});
      }
    }
  }
  if (acc.empty()) return Expr(constant);
  return build_add(constant, std::move(acc));
}

Expr mul(const std::vector<Expr>& args) {
  Rational coeff = 1;
  std::vector<Factor> fs;
  for (const auto& a : args) {
    switch (a.kind()) {
      case Expr::Kind::Number:
        coeff *= a.number();
        if (coeff == 0) return Expr();
        break;
      case Expr::Kind::Mul:
        coeff *= a.coeff();
        fs.insert(fs.end(), a.factors().begin(), a.factors().end());
        break;
      default:
        fs.push_back({a, Expr(1)});
    }
  }
  if (fs.empty()) return Expr(coeff);
  if (fs.size() == 1 && fs[0].exponent.is_one() && !fs[0].base.is_add()) return scaled(fs[0].base, coeff);
  return mul_factors(coeff, std::move(fs));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_number()) {
    const Rational& n = exponent.number();
    if (n == 0) return Expr(1);
    if (n == 1) return base;
    if (base.is_number()) {
      if (auto v = rational_pow(base.number(), n)) return Expr(*v);
      return Builder::mul(1, {Factor{base, exponent}});
    }
  }
  if (base.is_number()) {
    if (base.is_one()) return Expr(1);
    if (base.is_zero_literal()) return Expr();
    return Builder::mul(1, {Factor{base, canonical_exponent(exponent)}});
  }
  if (base.is_mul()) {
    if (exponent.is_integer() || base.coeff() > 0) {
      std::vector<Expr> parts;
      parts.reserve(base.factors().size() + 1);
      parts.push_back(pow(Expr(base.coeff()), exponent));
      for (const auto& f : base.factors()) parts.push_back(pow(f.base, mul({f.exponent, exponent})));
      return mul(parts);
    }
    return mul_factors(1, {Factor{base, exponent}});
  }
  if (base.is_func(FuncKind::Exp)) return exp(mul({base.arg(), exponent}));
  return mul_factors(1, {Factor{base, exponent}});
}

bool has_negative_sign(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return e.number() < 0;
    case Expr::Kind::Mul:
      return e.coeff() < 0;
    case Expr::Kind::Add:
      return e.terms().front().coeff < 0;
    default:
      return false;
  }
}

Expr func(FuncKind f, const Expr& arg_in) {
  Expr arg = arg_in;
  switch (f) {
    case FuncKind::Exp: {
      if (has_add_denominator(arg)) arg = normal(arg);
      if (arg.is_zero_literal()) return Expr(1);
      if (arg.is_func(FuncKind::Ln)) return arg.arg();
      if (arg.is_mul() && arg.factors().size() == 1 && arg.factors()[0].exponent.is_one() &&
          arg.factors()[0].base.is_func(FuncKind::Ln))
        return pow(arg.factors()[0].base.arg(), Expr(arg.coeff()));
      return Builder::func(f, arg);
    }
    case FuncKind::Ln: {
      if (arg.is_number()) {
        if (arg.number() <= 0) throw DomainError("ln of a non-positive number");
        if (arg.is_one()) return Expr();
        return Builder::func(f, arg);
      }
      if (arg.is_func(FuncKind::Exp)) return arg.arg();
      if (arg.is_mul() && arg.coeff() > 0) {
        bool expandable = true;
        for (const auto& fa : arg.factors())
          if (!fa.base.is_symbol() && !fa.base.is_func(FuncKind::Exp)) expandable = false;
        if (expandable) {
          std::vector<Expr> parts;
          if (arg.coeff() != 1) parts.push_back(Builder::func(FuncKind::Ln, Expr(arg.coeff())));
          for (const auto& fa : arg.factors()) parts.push_back(mul({fa.exponent, ln(fa.base)}));
          return add(parts);
        }
      }
      return Builder::func(f, arg);
    }
    case FuncKind::Sin:
      if (arg.is_zero_literal()) return Expr();
      if (has_negative_sign(arg)) return mul({Expr(-1), Builder::func(f, mul({Expr(-1), arg}))});
      return Builder::func(f, arg);
    case FuncKind::Cos:
      if (arg.is_zero_literal()) return Expr(1);
      if (has_negative_sign(arg)) return Builder::func(f, mul({Expr(-1), arg}));
      return Builder::func(f, arg);
  }
  return Builder::func(f, arg);
}

Expr sqrt(const Expr& a) { return pow(a, Expr(Rational(1, 2))); }

Expr fn_app(const std::string& name, std::vector<std::string> args, std::vector<int> derivs) {
  if (derivs.empty()) derivs.assign(args.size(), 0);
  return Builder::fn_app(name, std::move(args), std::move(derivs));
}

Expr operator+(const Expr& a, const Expr& b) { return add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return add({a, mul({Expr(-1), b})}); }
Expr operator*(const Expr& a, const Expr& b) { return mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return mul({a, pow(b, Expr(-1))}); }
Expr operator-(const Expr& a) { return mul({Expr(-1), a}); }
Expr rat(long num, long den) { return Expr(Rational(num, den) * 1); }

std::vector<Expr> additive_terms(const Expr& e) {
  if (e.is_zero_literal()) return {};
  if (!e.is_add()) return {e};
  std::vector<Expr> out;
  out.reserve(e.terms().size() + 1);
  for (const auto& t : e.terms()) out.push_back(scaled(t.monomial, t.coeff));
  if (e.constant() != 0) out.push_back(Expr(e.constant()));
  return out;
}

std::vector<Expr> multiplicative_factors(const Expr& e) {
  if (!e.is_mul()) return {e};
  std::vector<Expr> out;
  if (e.coeff() != 1) out.push_back(Expr(e.coeff()));
  for (const auto& f : e.factors())
    out.push_back(f.exponent.is_one() ? f.base : Builder::mul(1, {f}));
  return out;
}

}  // namespace phm
