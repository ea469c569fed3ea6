#include "phm/analysis.hpp"

#include <cmath>
#include <random>

#include "phm/errors.hpp"

namespace phm {

const char* to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::Zero:
      return "Zero";
    case ZeroVerdict::NonZero:
      return "NonZero";
    case ZeroVerdict::Unknown:
      return "Unknown";
  }
  return "?";
}

std::pair<double, double> SamplingDomain::range(const std::string& name) const {
  auto it = ranges.find(name);
  return it == ranges.end() ? fallback : it->second;
}

namespace {

bool has_fn_app(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::FnApp:
      return true;
    case Expr::Kind::Func:
      return has_fn_app(e.arg());
    case Expr::Kind::Mul:
      for (const auto& f : e.factors())
        if (has_fn_app(f.base) || has_fn_app(f.exponent)) return true;
      return false;
    case Expr::Kind::Add:
      for (const auto& t : e.terms())
        if (has_fn_app(t.monomial)) return true;
      return false;
    default:
      return false;
  }
}

}  // namespace

ZeroVerdict is_zero(const Expr& e, const SamplingDomain& domain) {
  if (e.is_zero_literal()) return ZeroVerdict::Zero;
  if (e.is_number()) return ZeroVerdict::NonZero;
  Expr reduced = reduce_trig_squares(clear_denominators(e));
  if (reduced.is_zero_literal()) return ZeroVerdict::Zero;
  if (normal(reduced).is_zero_literal()) return ZeroVerdict::Zero;
  if (has_fn_app(reduced)) return ZeroVerdict::Unknown;

  const auto terms = additive_terms(e);
  std::mt19937_64 rng(domain.seed);
  Env env;
  int evaluated = 0;
  for (int i = 0; i < domain.samples; ++i) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      for (const auto& name : e.free_symbols()) {
        auto [lo, hi] = domain.range(name);
        env[name] = std::uniform_real_distribution<double>(lo, hi)(rng);
      }
      try {
        double v = eval_numeric(e, env);
        double scale = 1.0;
        for (const auto& t : terms) scale = std::max(scale, std::fabs(eval_numeric(t, env)));
        ++evaluated;
        if (std::fabs(v) > domain.tolerance * scale) return ZeroVerdict::NonZero;
        break;
      } catch (const DomainError&) {
        continue;
      }
    }
  }
  return ZeroVerdict::Unknown;
}

Expr MonomialKey::monomial() const {
  std::vector<Expr> fs;
  for (const auto& [v, x] : exponents) fs.push_back(pow(Expr::variable(v), x));
  return mul(fs);
}

std::string MonomialKey::str() const { return render(monomial()); }

bool MonomialKeyLess::operator()(const MonomialKey& a, const MonomialKey& b) const {
  auto i = a.exponents.begin();
  auto j = b.exponents.begin();
  for (; i != a.exponents.end() && j != b.exponents.end(); ++i, ++j) {
    if (i->first != j->first) return i->first < j->first;
    int c = compare(i->second, j->second);
    if (c) return c < 0;
  }
  return i == a.exponents.end() && j != b.exponents.end();
}

Collected collect_by(const Expr& e, const std::vector<std::string>& vars) {
  std::set<std::string> varset(vars.begin(), vars.end());
  std::map<MonomialKey, std::vector<Expr>, MonomialKeyLess> groups;
  for (const auto& term : additive_terms(e)) {
    MonomialKey key;
    std::vector<Expr> rest;
    for (const auto& f : multiplicative_factors(term)) {
      if (!f.depends_on_any(varset)) {
        rest.push_back(f);
        continue;
      }
      Expr base = f, exponent = Expr(1);
      if (f.is_mul()) {
        base = f.factors().front().base;
        exponent = f.factors().front().exponent;
      }
      if (!base.is_symbol() || !varset.count(base.name()) || exponent.depends_on_any(varset))
        throw NonSeparable("term is not a product of powers of the separation variables", render(term));
      auto [it, fresh] = key.exponents.emplace(base.name(), exponent);
      if (!fresh) it->second = it->second + exponent;
    }
    for (auto it = key.exponents.begin(); it != key.exponents.end();) {
      if (it->second.is_zero_literal()) {
        it = key.exponents.erase(it);
      } else {
        ++it;
      }
    }
    groups[key].push_back(mul(rest));
  }
  Collected out;
  for (auto& [k, parts] : groups) {
    Expr c = add(parts);
    if (!c.is_zero_literal()) out.emplace(k, c);
  }
  return out;
}

}  // namespace phm
