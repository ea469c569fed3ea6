#include "phm/poly.hpp"

#include <algorithm>
#include <cmath>

#include "expr_node.hpp"
#include "phm/errors.hpp"

namespace phm {

namespace {

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

// a / b if b divides a.
bool mono_div(const Monomial& a, const Monomial& b, Monomial& out) {
  out.clear();
  std::size_t i = 0;
  for (const auto& [v, e] : b) {
    while (i < a.size() && a[i].first < v) out.push_back(a[i++]);
    if (i == a.size() || a[i].first != v || a[i].second < e) return false;
    if (a[i].second > e) out.emplace_back(v, a[i].second - e);
    ++i;
  }
  while (i < a.size()) out.push_back(a[i++]);
  return true;
}

int mono_degree(const Monomial& m, int var) {
  for (const auto& [v, e] : m)
    if (v == var) return e;
  return 0;
}

Monomial mono_without(const Monomial& m, int var) {
  Monomial out;
  for (const auto& p : m)
    if (p.first != var) out.push_back(p);
  return out;
}

Poly prem(const Poly& a, const Poly& b, int x) {
  const int d = b.degree(x);
  const Poly lc = b.leading_coeff(x);
  Poly r = a;
  while (!r.is_zero()) {
    int dr = r.degree(x);
    if (dr < d) break;
    r = r * lc - r.leading_coeff(x) * Poly::var(x, dr - d) * b;
  }
  return r;
}

Poly content(const Poly& a, int x) {
  Poly g;
  for (const auto& [k, c] : a.coeffs(x)) {
    g = Poly::gcd(g, c);
    if (g.is_constant()) return Poly(1);
  }
  return g;
}

Poly primitive_part(const Poly& a, int x) {
  Poly c = content(a, x);
  Poly q;
  if (!Poly::divide(a, c, q)) throw Error("internal: content does not divide");
  return q;
}

}  // namespace

bool MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
  auto i = a.rbegin();
  auto j = b.rbegin();
  for (; i != a.rend() && j != b.rend(); ++i, ++j) {
    if (i->first != j->first) return i->first < j->first;
    if (i->second != j->second) return i->second < j->second;
  }
  return i == a.rend() && j != b.rend();
}

Poly::Poly(const Rational& c) {
  if (c != 0) terms_.emplace(Monomial{}, c);
}

Poly Poly::var(int id, int power) {
  Poly p;
  if (power == 0) return Poly(1);
  p.terms_.emplace(Monomial{{id, power}}, Rational(1));
  return p;
}

Poly Poly::from_terms(Terms terms) {
  Poly p;
  for (auto& [m, c] : terms)
    if (c != 0) p.terms_.emplace(m, c);
  return p;
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Rational Poly::constant_value() const { return terms_.empty() ? Rational(0) : terms_.begin()->second; }

int Poly::degree(int var) const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, mono_degree(m, var));
  return d;
}

int Poly::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) {
    int s = 0;
    for (const auto& p : m) s += p.second;
    d = std::max(d, s);
  }
  return d;
}

std::vector<int> Poly::variables() const {
  std::vector<int> out;
  for (const auto& [m, c] : terms_)
    for (const auto& p : m) out.push_back(p.first);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Poly::main_variable() const {
  int v = -1;
  for (const auto& [m, c] : terms_)
    if (!m.empty()) v = std::max(v, m.back().first);
  return v;
}

std::map<int, Poly> Poly::coeffs(int var) const {
  std::map<int, Poly> out;
  for (const auto& [m, c] : terms_) out[mono_degree(m, var)].terms_.emplace(mono_without(m, var), c);
  return out;
}

Poly Poly::leading_coeff(int var) const {
  int d = degree(var);
  Poly out;
  for (const auto& [m, c] : terms_)
    if (mono_degree(m, var) == d) out.terms_.emplace(mono_without(m, var), c);
  return out;
}

std::pair<Monomial, Rational> Poly::leading_term() const {
  if (terms_.empty()) return {Monomial{}, Rational(0)};
  return *terms_.rbegin();
}

Poly Poly::operator-() const { return scaled(-1); }

Poly operator+(const Poly& a, const Poly& b) {
  Poly out = a;
  for (const auto& [m, c] : b.terms_) {
    auto it = out.terms_.find(m);
    if (it == out.terms_.end()) {
      out.terms_.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == 0) out.terms_.erase(it);
    }
  }
  return out;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      Monomial m = mono_mul(ma, mb);
      auto it = out.terms_.find(m);
      if (it == out.terms_.end()) {
        out.terms_.emplace(std::move(m), ca * cb);
      } else {
        it->second += ca * cb;
        if (it->second == 0) out.terms_.erase(it);
      }
    }
  }
  return out;
}

Poly Poly::pow(unsigned n) const {
  Poly result(1);
  Poly base = *this;
  while (n) {
    if (n & 1U) result = result * base;
    n >>= 1U;
    if (n) base = base * base;
  }
  return result;
}

Poly Poly::scaled(const Rational& c) const {
  if (c == 0) return Poly();
  Poly out = *this;
  for (auto& [m, v] : out.terms_) v *= c;
  return out;
}

bool Poly::divide(const Poly& a, const Poly& b, Poly& quotient) {
  if (b.is_zero()) throw DomainError("polynomial division by zero");
  quotient = Poly();
  if (b.is_constant()) {
    quotient = a.scaled(1 / b.constant_value());
    return true;
  }
  Poly r = a;
  const auto [lm, lc] = b.leading_term();
  Monomial q;
  while (!r.is_zero()) {
    auto [rm, rc] = r.leading_term();
    if (!mono_div(rm, lm, q)) return false;
    Poly t;
    t.terms_.emplace(q, rc / lc);
    quotient = quotient + t;
    r = r - t * b;
  }
  return true;
}

Poly Poly::monic() const {
  if (terms_.empty()) return *this;
  return scaled(1 / leading_term().second);
}

Poly Poly::gcd(const Poly& a, const Poly& b) {
  if (a.is_zero()) return b.monic();
  if (b.is_zero()) return a.monic();
  if (a.is_constant() || b.is_constant()) return Poly(1);
  Poly q;
  if (divide(a, b, q)) return b.monic();
  if (divide(b, a, q)) return a.monic();
  const int x = std::max(a.main_variable(), b.main_variable());
  if (a.degree(x) == 0) return gcd(a, content(b, x));
  if (b.degree(x) == 0) return gcd(content(a, x), b);
  Poly ca = content(a, x);
  Poly cb = content(b, x);
  Poly pa, pb;
  divide(a, ca, pa);
  divide(b, cb, pb);
  Poly c = gcd(ca, cb);
  if (pa.degree(x) < pb.degree(x)) std::swap(pa, pb);
  Poly g;
  for (;;) {
    Poly r = prem(pa, pb, x);
    if (r.is_zero()) {
      g = pb;
      break;
    }
    if (r.degree(x) == 0) {
      g = Poly(1);
      break;
    }
    pa = pb;
    pb = primitive_part(r, x);
  }
  if (!g.is_constant()) g = primitive_part(g, x);
  return (c * g).monic();
}

Poly Poly::compose(int var, const Poly& value) const {
  Poly out;
  std::map<int, Poly> powers;
  for (const auto& [m, c] : terms_) {
    int d = mono_degree(m, var);
    Poly rest;
    rest.terms_.emplace(mono_without(m, var), c);
    if (d == 0) {
      out = out + rest;
      continue;
    }
    auto it = powers.find(d);
    if (it == powers.end()) it = powers.emplace(d, value.pow(static_cast<unsigned>(d))).first;
    out = out + rest * it->second;
  }
  return out;
}

double Poly::eval(const std::vector<double>& values) const {
  double s = 0;
  for (const auto& [m, c] : terms_) {
    double t = c.get_d();
    for (const auto& [v, e] : m) t *= std::pow(values.at(static_cast<std::size_t>(v)), e);
    s += t;
  }
  return s;
}

// ---------------------------------------------------------------------------

RatFunc::RatFunc(const Poly& num) : num_(num) {}

RatFunc::RatFunc(const Poly& num, const Poly& den) {
  if (den.is_zero()) throw DomainError("rational function with zero denominator");
  if (num.is_zero()) return;
  Poly g = Poly::gcd(num, den);
  Poly n, d;
  Poly::divide(num, g, n);
  Poly::divide(den, g, d);
  Rational lc = d.leading_term().second;
  num_ = n.scaled(1 / lc);
  den_ = d.scaled(1 / lc);
}

Rational RatFunc::constant_value() const { return num_.constant_value() / den_.constant_value(); }

RatFunc operator+(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den_ == b.den_) {
    if (a.den_.is_constant()) {
      RatFunc r;
      r.num_ = a.num_ + b.num_;
      r.den_ = a.den_;
      if (r.num_.is_zero()) r.den_ = Poly(1);
      return r;
    }
    return RatFunc(a.num_ + b.num_, a.den_);
  }
  return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

RatFunc operator-(const RatFunc& a, const RatFunc& b) { return a + (-b); }

RatFunc operator*(const RatFunc& a, const RatFunc& b) {
  if (a.is_zero() || b.is_zero()) return RatFunc();
  if (a.den_.is_constant() && b.den_.is_constant()) {
    RatFunc r;
    r.num_ = (a.num_ * b.num_).scaled(1 / (a.den_.constant_value() * b.den_.constant_value()));
    return r;
  }
  return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
}

RatFunc operator/(const RatFunc& a, const RatFunc& b) {
  if (b.is_zero()) throw DomainError("division by zero rational function");
  return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
}

RatFunc RatFunc::operator-() const {
  RatFunc r = *this;
  r.num_ = -r.num_;
  return r;
}

namespace {

RatFunc substitute_poly(const Poly& p, int var, const RatFunc& value) {
  auto cs = p.coeffs(var);
  if (cs.size() == 1 && cs.begin()->first == 0) return RatFunc(p);
  RatFunc out;
  RatFunc power(Rational(1));
  int k = 0;
  for (const auto& [deg, c] : cs) {
    while (k < deg) {
      power = power * value;
      ++k;
    }
    out = out + RatFunc(c) * power;
  }
  return out;
}

}  // namespace

RatFunc substitute_var(const RatFunc& r, int var, const RatFunc& value) {
  if (r.num().degree(var) == 0 && r.den().degree(var) == 0) return r;
  return substitute_poly(r.num(), var, value) / substitute_poly(r.den(), var, value);
}

std::optional<Poly> poly_sqrt(const Poly& p) {
  if (p.is_zero()) return Poly();
  auto [lm, lc] = p.leading_term();
  if (lc < 0) return std::nullopt;
  Monomial root_m;
  for (const auto& [v, e] : lm) {
    if (e % 2) return std::nullopt;
    root_m.emplace_back(v, e / 2);
  }
  mpz_class rn, rd;
  if (!mpz_root(rn.get_mpz_t(), lc.get_num_mpz_t(), 2) || !mpz_root(rd.get_mpz_t(), lc.get_den_mpz_t(), 2))
    return std::nullopt;
  Rational rc(rn, rd);
  rc.canonicalize();
  Poly::Terms lead;
  lead.emplace(root_m, rc);
  Poly r = Poly::from_terms(lead);
  Poly twice_lead = r.scaled(2);
  for (std::size_t iter = 0; iter <= p.terms().size() + 1; ++iter) {
    Poly rem = p - r * r;
    if (rem.is_zero()) return r;
    Poly q;
    auto [m, c] = rem.leading_term();
    Poly::Terms one;
    one.emplace(m, c);
    if (!Poly::divide(Poly::from_terms(one), twice_lead, q)) return std::nullopt;
    if (!MonomialLess{}(q.leading_term().first, root_m)) return std::nullopt;
    r = r + q;
  }
  return std::nullopt;
}

namespace {

void collect_partial_factors(const Poly& p, std::vector<Poly>& out) {
  if (p.is_constant()) return;
  // Monomial content.
  std::map<int, int> mins;
  bool first = true;
  for (const auto& [m, c] : p.terms()) {
    std::map<int, int> here(m.begin(), m.end());
    if (first) {
      mins = here;
      first = false;
      continue;
    }
    for (auto it = mins.begin(); it != mins.end();) {
      auto h = here.find(it->first);
      if (h == here.end()) {
        it = mins.erase(it);
      } else {
        it->second = std::min(it->second, h->second);
        ++it;
      }
    }
  }
  Poly rest = p;
  for (const auto& [v, e] : mins) {
    out.push_back(Poly::var(v));
    Poly q;
    Poly::divide(rest, Poly::var(v, e), q);
    rest = q;
  }
  if (rest.is_constant()) return;
  int x = rest.main_variable();
  Poly cont;
  for (const auto& [k, c] : rest.coeffs(x)) {
    cont = Poly::gcd(cont, c);
    if (cont.is_constant()) break;
  }
  if (!cont.is_constant()) {
    collect_partial_factors(cont, out);
    Poly q;
    Poly::divide(rest, cont, q);
    rest = q;
  }
  if (!rest.is_constant()) out.push_back(rest.monic());
}

}  // namespace

std::vector<Poly> partial_factors(const Poly& p) {
  std::vector<Poly> raw;
  collect_partial_factors(p, raw);
  std::vector<Poly> out;
  for (auto& f : raw) {
    f = f.monic();
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------

int AtomTable::id(const Expr& atom) {
  auto it = ids_.find(atom);
  if (it != ids_.end()) return it->second;
  int id = static_cast<int>(atoms_.size());
  atoms_.push_back(atom);
  ids_.emplace(atom, id);
  return id;
}

std::optional<int> AtomTable::find(const Expr& atom) const {
  auto it = ids_.find(atom);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

namespace {

RatFunc int_power(const RatFunc& r, long n) {
  if (n >= 0) return RatFunc(r.num().pow(static_cast<unsigned>(n)), r.den().pow(static_cast<unsigned>(n)));
  if (r.is_zero()) throw DomainError("0 raised to a negative power");
  return RatFunc(r.den().pow(static_cast<unsigned>(-n)), r.num().pow(static_cast<unsigned>(-n)));
}

RatFunc atom_power(const Expr& base, const Expr& exponent, AtomTable& atoms) {
  return RatFunc(Poly::var(atoms.id(mul_factors(1, {Factor{base, exponent}}))));
}

RatFunc factor_to_ratfunc(const Expr& base, const Expr& exponent, AtomTable& atoms) {
  if (exponent.is_integer() && exponent.number().get_num().fits_slong_p()) {
    return int_power(to_ratfunc(base, atoms), exponent.number().get_num().get_si());
  }
  if (exponent.is_number()) {
    const Rational& q = exponent.number();
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    Rational frac = q - Rational(fl);
    RatFunc a = atom_power(base, Expr(frac), atoms);
    if (fl == 0) return a;
    return a * int_power(to_ratfunc(base, atoms), fl.get_si());
  }
  if (exponent.is_add() && exponent.constant().get_den() == 1 && exponent.constant() != 0) {
    long k = exponent.constant().get_num().get_si();
    RatFunc a = atom_power(base, exponent - Expr(k), atoms);
    return a * int_power(to_ratfunc(base, atoms), k);
  }
  return atom_power(base, exponent, atoms);
}

}  // namespace

RatFunc to_ratfunc(const Expr& e, AtomTable& atoms) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      return RatFunc(e.number());
    case Expr::Kind::Symbol:
    case Expr::Kind::FnApp:
    case Expr::Kind::Func:
      return RatFunc(Poly::var(atoms.id(e)));
    case Expr::Kind::Mul: {
      RatFunc r(e.coeff());
      for (const auto& f : e.factors()) r = r * factor_to_ratfunc(f.base, f.exponent, atoms);
      return r;
    }
    case Expr::Kind::Add: {
      RatFunc r(e.constant());
      for (const auto& t : e.terms()) r = r + RatFunc(t.coeff) * to_ratfunc(t.monomial, atoms);
      return r;
    }
  }
  return RatFunc();
}

Expr to_expr(const Poly& p, const AtomTable& atoms) {
  std::vector<Expr> terms;
  terms.reserve(p.terms().size());
  for (const auto& [m, c] : p.terms()) {
    std::vector<Expr> fs{Expr(c)};
    for (const auto& [v, e] : m) fs.push_back(pow(atoms.atom(v), Expr(e)));
    terms.push_back(mul(fs));
  }
  return add(terms);
}

Expr to_expr(const RatFunc& r, const AtomTable& atoms) {
  Expr n = to_expr(r.num(), atoms);
  if (r.den().is_constant()) return mul({n, Expr(1 / r.den().constant_value())});
  return mul({n, pow(to_expr(r.den(), atoms), Expr(-1))});
}

Expr normal(const Expr& e) {
  AtomTable atoms;
  return to_expr(to_ratfunc(e, atoms), atoms);
}

}  // namespace phm
