#include "phm/solve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <set>

#include "phm/errors.hpp"
#include "phm/poly.hpp"

namespace phm {

// ---------------------------------------------------------------------------
// Templates

AnsatzTemplate& AnsatzTemplate::with(const std::string& function, std::vector<Expr> terms) {
  basis[function] = std::move(terms);
  return *this;
}

std::size_t AnsatzTemplate::size() const {
  std::size_t n = 0;
  for (const auto& [f, terms] : basis) n += terms.size();
  return n;
}

namespace {

void collect_rates(const Expr& e, std::set<std::string>& out) {
  switch (e.kind()) {
    case Expr::Kind::Symbol:
      if (e.symbol_kind() == SymbolKind::Rate) out.insert(e.name());
      return;
    case Expr::Kind::Func:
      collect_rates(e.arg(), out);
      return;
    case Expr::Kind::Mul:
      for (const auto& f : e.factors()) {
        collect_rates(f.base, out);
        collect_rates(f.exponent, out);
      }
      return;
    case Expr::Kind::Add:
      for (const auto& t : e.terms()) collect_rates(t.monomial, out);
      return;
    default:
      return;
  }
}

}  // namespace

std::vector<std::string> AnsatzTemplate::rate_symbols() const {
  std::set<std::string> out;
  for (const auto& [f, terms] : basis)
    for (const auto& t : terms) collect_rates(t, out);
  return {out.begin(), out.end()};
}

void AnsatzTemplate::validate(const SystemModel& sys) const {
  auto names = unknown_function_names(sys);
  std::set<std::string> allowed{SystemModel::time};
  for (const auto& q : sys.states()) allowed.insert(q);
  for (const auto& p : sys.params) allowed.insert(p.name);
  for (const auto& r : rate_symbols()) allowed.insert(r);
  for (const auto& [f, terms] : basis) {
    if (std::find(names.begin(), names.end(), f) == names.end())
      throw SemanticError("template names unknown function '" + f + "'");
    std::set<Expr, ExprLess> seen;
    for (const auto& t : terms) {
      if (!seen.insert(t).second) throw SemanticError("duplicate basis term '" + render(t) + "' for " + f);
      for (const auto& s : t.free_symbols())
        if (!allowed.count(s)) throw SemanticError("basis term '" + render(t) + "' involves '" + s + "'");
    }
  }
}

Expr unknown_rate(const std::string& name) { return Expr::symbol(name, SymbolKind::Rate); }

std::vector<SymmetryCandidate> SolutionSet::generic_operators() const {
  std::vector<SymmetryCandidate> out;
  for (const auto& o : generic().operators)
    if (!o.trivial) out.push_back(o.op);
  return out;
}

std::vector<const SolutionBranch*> SolutionSet::constrained() const {
  std::vector<const SolutionBranch*> out;
  for (std::size_t i = 1; i < branches.size(); ++i) out.push_back(&branches[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Elimination with case splits

namespace {

using SparseRow = std::map<int, RatFunc>;

struct Branch {
  std::vector<std::pair<int, RatFunc>> subs;
  std::vector<Poly> nonzero;
  std::vector<std::string> conditions;
  int depth = 0;
};

struct BranchResult {
  Branch branch;
  std::vector<SparseRow> kernel;
};

struct Context {
  const SystemModel& sys;
  AtomTable atoms;
  std::map<int, int> sign;
  std::map<int, int> param_rank;
  std::set<int> rate_vars;
  std::vector<Poly> model_nonzero;
  SolveOptions opts;
  std::vector<RejectedBranch> rejected;

  Expr expr(const Poly& p) const { return to_expr(p, atoms); }
  Expr expr(const RatFunc& r) const { return to_expr(r, atoms); }
  std::string name(int var) const { return render(atoms.atom(var)); }
};

Poly strip_known(Poly f, const std::vector<Poly>& known) {
  for (const auto& g : known) {
    if (g.is_constant()) continue;
    Poly q;
    while (!f.is_constant() && Poly::divide(f, g, q)) f = q;
  }
  return f;
}

bool sign_definite(const Context& ctx, const Poly& f) {
  for (int v : f.variables()) {
    auto it = ctx.sign.find(v);
    if (it == ctx.sign.end() || it->second <= 0) return false;
  }
  int s = 0;
  for (const auto& [m, c] : f.terms()) {
    int cs = c > 0 ? 1 : -1;
    if (s == 0) s = cs;
    if (cs != s) return false;
  }
  return true;
}

// Splits off linear factors x - r*y and x - r with small rationals r.
void split_linear(const Poly& f, std::vector<Poly>& out) {
  if (f.total_degree() <= 1) {
    out.push_back(f.monic());
    return;
  }
  if (auto r = poly_sqrt(f.monic())) {
    split_linear(*r, out);
    return;
  }
  auto vars = f.variables();
  for (int x : vars) {
    std::vector<Poly> ys{Poly(1)};
    for (int y : vars)
      if (y != x) ys.push_back(Poly::var(y));
    for (const auto& y : ys)
      for (int n = 0; n <= 4; ++n)
        for (int d = 1; d <= 4; ++d) {
          if (std::gcd(n, d) != 1) continue;
          for (int sgn : {1, -1}) {
            if (n == 0 && sgn < 0) continue;
            Poly g = Poly::var(x) - y.scaled(Rational(sgn * n, d));
            Poly q;
            if (Poly::divide(f, g, q)) {
              out.push_back(g.monic());
              if (!q.is_constant()) split_linear(q, out);
              return;
            }
          }
        }
  }
  out.push_back(f.monic());
}

// Factors of `p` not known to be nonzero in the branch.
std::vector<Poly> unknown_factors(const Context& ctx, const Branch& br, const Poly& p) {
  std::vector<Poly> out;
  if (p.is_constant()) return out;
  std::vector<Poly> pieces;
  for (const auto& f : partial_factors(p)) split_linear(f, pieces);
  for (const auto& f0 : pieces) {
    Poly f = strip_known(strip_known(f0, ctx.model_nonzero), br.nonzero);
    if (f.is_constant()) continue;
    auto vars = f.variables();
    if (vars.size() == 1 && f.terms().size() == 1 && ctx.sign.count(vars[0])) continue;
    if (sign_definite(ctx, f)) continue;
    f = f.monic();
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

bool has_rate(const Context& ctx, const Poly& f) {
  for (int v : f.variables())
    if (ctx.rate_vars.count(v)) return true;
  return false;
}

RatFunc apply_subs(RatFunc r, const std::vector<std::pair<int, RatFunc>>& subs) {
  for (const auto& [v, val] : subs) r = substitute_var(r, v, val);
  return r;
}

// Adds var = value to the branch; false if an assumption is contradicted.
// A vanishing denominator in an earlier substitution is a contradiction too.
bool add_substitution(Branch& br, int var, const RatFunc& value) {
  try {
    for (auto& [v, val] : br.subs) val = substitute_var(val, var, value);
  } catch (const DomainError&) {
    return false;
  }
  br.subs.emplace_back(var, value);
  std::vector<Poly> kept;
  for (const auto& p : br.nonzero) {
    RatFunc r = substitute_var(RatFunc(p), var, value);
    if (r.is_zero()) return false;
    for (const auto& f : partial_factors(r.num())) kept.push_back(f);
  }
  br.nonzero = kept;
  return true;
}

struct Root {
  int var;
  RatFunc value;
  std::vector<Poly> nonzero;
};

std::vector<RatFunc> rate_candidates(const Context& ctx) {
  std::vector<RatFunc> out;
  std::vector<Poly> xs{Poly(1)};
  for (const auto& [v, r] : ctx.param_rank) xs.push_back(Poly::var(v));
  for (const auto& x : xs)
    for (int n = 1; n <= 4; ++n)
      for (int d = 1; d <= 4; ++d)
        if (std::gcd(n, d) == 1)
          for (int s : {1, -1}) out.emplace_back(x.scaled(Rational(s * n, d)));
  return out;
}

// Roots of a rate condition f(lambda) = 0, degree at most 3.
std::vector<Root> rate_roots(const Context& ctx, const Poly& f, int var) {
  std::vector<Root> out;
  Poly g = f;
  auto push = [&](const RatFunc& value, std::vector<Poly> nz) {
    for (const auto& r : out)
      if (r.value == value) return;
    out.push_back({var, value, std::move(nz)});
  };
  if (g.degree(var) > 3)
    throw UnsolvableRateCondition("rate condition " + render(ctx.expr(f)) + " has degree " +
                                  std::to_string(g.degree(var)));
  while (g.degree(var) > 0) {
    auto cs = g.coeffs(var);
    const int d = g.degree(var);
    Poly c0 = cs.count(0) ? cs.at(0) : Poly();
    if (c0.is_zero()) {
      push(RatFunc(Rational(0)), {});
      Poly q;
      Poly::divide(g, Poly::var(var), q);
      g = q;
      continue;
    }
    if (d == 1) {
      const Poly& c1 = cs.at(1);
      std::vector<Poly> nz;
      if (!c1.is_constant()) nz.push_back(c1);
      push(RatFunc(-c0) / RatFunc(c1), nz);
      break;
    }
    if (d == 2) {
      const Poly& c2 = cs.at(2);
      Poly c1 = cs.count(1) ? cs.at(1) : Poly();
      auto root = poly_sqrt(c1 * c1 - c2 * c0.scaled(4));
      if (!root)
        throw UnsolvableRateCondition("rate condition " + render(ctx.expr(f)) + " has no rational roots");
      std::vector<Poly> nz;
      if (!c2.is_constant()) nz.push_back(c2);
      push(RatFunc(-c1 + *root) / RatFunc(c2.scaled(2)), nz);
      push(RatFunc(-c1 - *root) / RatFunc(c2.scaled(2)), nz);
      break;
    }
    bool found = false;
    for (const auto& cand : rate_candidates(ctx)) {
      if (!substitute_var(RatFunc(g), var, cand).is_zero()) continue;
      push(cand, {});
      Poly q;
      if (!Poly::divide(g * cand.den(), Poly::var(var) * cand.den() - cand.num(), q)) continue;
      g = q;
      found = true;
      break;
    }
    if (!found)
      throw UnsolvableRateCondition("cubic rate condition " + render(ctx.expr(f)) + " has no root of the searched form");
  }
  return out;
}

std::optional<Root> parameter_root(const Context& ctx, const Poly& f) {
  std::optional<Root> best;
  int best_rank = -1;
  for (int v : f.variables()) {
    auto it = ctx.param_rank.find(v);
    if (it == ctx.param_rank.end() || f.degree(v) != 1) continue;
    auto cs = f.coeffs(v);
    const Poly& c1 = cs.at(1);
    bool ok = true;
    for (int w : c1.variables())
      if (w == v) ok = false;
    if (!ok) continue;
    int rank = it->second + (c1.is_constant() ? 1000 : 0);
    if (rank <= best_rank) continue;
    best_rank = rank;
    Poly c0 = cs.count(0) ? cs.at(0) : Poly();
    std::vector<Poly> nz;
    if (!c1.is_constant()) nz.push_back(c1);
    best = Root{v, RatFunc(-c0) / RatFunc(c1), nz};
  }
  return best;
}

std::string condition_text(const Context& ctx, const Poly& f) { return render(ctx.expr(f)) + " = 0"; }

// Queues the branches in which one of `factors` vanishes; the i-th child
// assumes the earlier factors are nonzero.
void spawn_children(Context& ctx, const Branch& br, const std::vector<Poly>& factors, std::deque<Branch>& queue) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const Poly& f = factors[i];
    Branch base = br;
    base.nonzero.insert(base.nonzero.end(), factors.begin(), factors.begin() + static_cast<long>(i));
    base.depth = br.depth + 1;
    const std::string cond = condition_text(ctx, f);
    if (base.depth > ctx.opts.max_depth) {
      ctx.rejected.push_back({cond, "BranchLimitExceeded: depth " + std::to_string(ctx.opts.max_depth)});
      continue;
    }
    std::vector<Root> roots;
    try {
      if (has_rate(ctx, f)) {
        int var = -1;
        for (int v : f.variables())
          if (ctx.rate_vars.count(v)) var = v;
        roots = rate_roots(ctx, f, var);
      }
    } catch (const UnsolvableRateCondition& e) {
      // The rate stays free; the condition then fixes a parameter.
      if (!parameter_root(ctx, f)) {
        ctx.rejected.push_back({cond, std::string("UnsolvableRateCondition: ") + e.what()});
        continue;
      }
    }
    if (roots.empty()) {
      auto r = parameter_root(ctx, f);
      if (!r) {
        ctx.rejected.push_back({cond, "not linear in any parameter"});
        continue;
      }
      roots.push_back(*r);
    }
    for (const auto& root : roots) {
      Branch child = base;
      if (!add_substitution(child, root.var, root.value)) continue;
      for (const auto& nz : root.nonzero) {
        RatFunc r = apply_subs(RatFunc(nz), child.subs);
        for (const auto& g : partial_factors(r.num())) child.nonzero.push_back(g);
      }
      child.conditions.push_back(ctx.name(root.var) + " = " + render(ctx.expr(root.value)));
      queue.push_back(std::move(child));
    }
  }
}

void normalize_row(SparseRow& row, int col) {
  RatFunc inv = RatFunc(Rational(1)) / row.at(col);
  for (auto& [c, v] : row) v = c == col ? RatFunc(Rational(1)) : v * inv;
}

void eliminate(SparseRow& target, const SparseRow& pivot_row, int col) {
  auto it = target.find(col);
  if (it == target.end()) return;
  RatFunc factor = it->second;
  for (const auto& [c, v] : pivot_row) {
    RatFunc nv = (target.count(c) ? target.at(c) : RatFunc()) - factor * v;
    if (nv.is_zero()) {
      target.erase(c);
    } else {
      target[c] = nv;
    }
  }
}

std::optional<BranchResult> run_branch(Context& ctx, Branch br, const std::vector<SparseRow>& original,
                                       const std::vector<int>& unknowns, std::deque<Branch>& queue) {
  std::vector<SparseRow> rows;
  for (const auto& r : original) {
    SparseRow out;
    for (const auto& [c, v] : r) {
      RatFunc nv = apply_subs(v, br.subs);
      if (!nv.is_zero()) out.emplace(c, nv);
    }
    if (!out.empty()) rows.push_back(std::move(out));
  }
  std::vector<bool> used(rows.size(), false);
  std::map<int, std::size_t> pivot_of;
  for (;;) {
    std::optional<std::pair<std::size_t, int>> pick;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (used[r]) continue;
      for (const auto& [c, v] : rows[r]) {
        if (!v.is_constant()) continue;
        if (!pick || c < pick->second || (c == pick->second && r < pick->first)) pick = std::make_pair(r, c);
        break;
      }
    }
    std::vector<Poly> branch_on;
    if (!pick) {
      std::tuple<int, std::size_t, int, int, std::size_t> best{};
      bool have = false;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (used[r]) continue;
        for (const auto& [c, v] : rows[r]) {
          auto fs = unknown_factors(ctx, br, v.num());
          int tier = 0;
          int degree = 0;
          if (!fs.empty()) tier = has_rate(ctx, v.num()) ? 1 : 2;
          for (const auto& f : fs) degree += f.total_degree();
          auto key = std::make_tuple(tier, fs.size(), degree, c, r);
          if (!have || key < best) {
            best = key;
            have = true;
            branch_on = fs;
          }
        }
      }
      if (!have) break;
      pick = std::make_pair(std::get<4>(best), std::get<3>(best));
    }
    auto [r, c] = *pick;
    if (!branch_on.empty()) {
      spawn_children(ctx, br, branch_on, queue);
      for (const auto& f : branch_on) br.nonzero.push_back(f);
    }
    normalize_row(rows[r], c);
    for (std::size_t o = 0; o < rows.size(); ++o)
      if (o != r) eliminate(rows[o], rows[r], c);
    used[r] = true;
    pivot_of[c] = r;
  }
  BranchResult res{std::move(br), {}};
  for (int u : unknowns) {
    if (pivot_of.count(u)) continue;
    SparseRow v{{u, RatFunc(Rational(1))}};
    for (const auto& [pc, r] : pivot_of) {
      auto it = rows[r].find(u);
      if (it != rows[r].end()) v[pc] = -it->second;
    }
    res.kernel.push_back(std::move(v));
  }
  if (res.kernel.empty()) return std::nullopt;
  return res;
}

// Clears denominators and common content; the entry of the first unknown
// gets a positive leading coefficient.
SparseRow tidy(const SparseRow& v) {
  Poly den(1);
  for (const auto& [c, x] : v) {
    Poly g = Poly::gcd(den, x.den());
    Poly q;
    Poly::divide(x.den(), g, q);
    den = den * q;
  }
  SparseRow out;
  Poly content;
  for (const auto& [c, x] : v) {
    RatFunc y = x * RatFunc(den);
    out[c] = y;
    content = Poly::gcd(content, y.num());
  }
  Rational lead = out.begin()->second.num().leading_term().second;
  Rational num_gcd = 0;
  for (const auto& [c, x] : out)
    for (const auto& [m, k] : x.num().terms()) {
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), num_gcd.get_num_mpz_t(), k.get_num_mpz_t());
      num_gcd = Rational(g);
    }
  RatFunc scale = RatFunc(Rational(1)) / RatFunc(content.is_zero() ? Poly(1) : content);
  if (content.is_constant()) scale = RatFunc(Rational(1));
  Rational k = num_gcd == 0 ? Rational(1) : Rational(1) / num_gcd;
  if (lead < 0) k = -k;
  for (auto& [c, x] : out) x = x * scale * RatFunc(k);
  return out;
}

struct Unknown {
  std::string function;
  Expr basis;
  Expr symbol;
};

bool is_trivial(const SystemModel& sys, const SymmetryCandidate& c) {
  if (!c.xi.is_zero_literal()) return false;
  for (const auto& [q, e] : c.eta)
    if (!e.is_zero_literal()) return false;
  if (c.B.depends_on(SystemModel::time)) return false;
  for (const auto& q : sys.states())
    if (c.B.depends_on(q)) return false;
  return true;
}

std::string relations_key(const ConstraintSet& cs) {
  std::vector<std::string> parts = cs.str();
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) key += p + ";";
  return key;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace {

// Rank over the functions of (t, states) with the remaining symbols fixed.
std::optional<std::size_t> rank_at(const SystemModel& sys, const std::vector<SymmetryCandidate>& cands,
                                   const std::set<std::string>& names, const SamplingDomain& dom,
                                   std::mt19937_64& rng) {
  std::set<std::string> fvars{SystemModel::time};
  for (const auto& q : sys.states()) fvars.insert(q);
  Env fixed;
  for (const auto& n : names)
    if (!fvars.count(n)) {
      auto [lo, hi] = dom.range(n);
      fixed[n] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
  auto states = sys.states();
  const std::size_t width = states.size() + 2;
  const std::size_t points = 3 * cands.size() + 4;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(cands.size()), static_cast<Eigen::Index>(points * width));
  std::size_t filled = 0;
  for (int attempt = 0; filled < points && attempt < static_cast<int>(points) * 20; ++attempt) {
    Env env = fixed;
    for (const auto& n : fvars) {
      auto [lo, hi] = n == SystemModel::time ? std::make_pair(0.0, 1.0) : dom.range(n);
      env[n] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    try {
      std::vector<std::vector<double>> vals;
      for (const auto& c : cands) {
        std::vector<double> v{eval_numeric(c.xi, env)};
        for (const auto& q : states) v.push_back(eval_numeric(c.eta_of(q), env));
        v.push_back(eval_numeric(c.B, env));
        vals.push_back(v);
      }
      for (std::size_t k = 0; k < width; ++k) {
        double scale = 0;
        for (const auto& v : vals) scale = std::max(scale, std::fabs(v[k]));
        if (scale == 0) scale = 1;
        for (std::size_t i = 0; i < cands.size(); ++i)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(filled * width + k)) = vals[i][k] / scale;
      }
      ++filled;
    } catch (const DomainError&) {
    }
  }
  if (filled < points) return std::nullopt;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  return rank;
}

}  // namespace

std::size_t candidate_rank(const SystemModel& sys, const std::vector<SymmetryCandidate>& cands, std::uint64_t seed) {
  if (cands.empty()) return 0;
  SamplingDomain dom = sys.sampling_domain(seed);
  std::mt19937_64 rng(seed);
  std::set<std::string> names;
  for (const auto& c : cands) {
    for (const auto& s : c.xi.free_symbols()) names.insert(s);
    for (const auto& s : c.B.free_symbols()) names.insert(s);
    for (const auto& [q, e] : c.eta)
      for (const auto& s : e.free_symbols()) names.insert(s);
  }
  std::size_t best = 0;
  int good = 0;
  for (int trial = 0; trial < 20 && good < 2; ++trial) {
    if (auto r = rank_at(sys, cands, names, dom, rng)) {
      best = std::max(best, *r);
      ++good;
    }
  }
  if (good == 0) throw DomainError("could not sample candidates for a rank test");
  return best;
}

bool spans_equal(const SystemModel& sys, const std::vector<SymmetryCandidate>& a,
                 const std::vector<SymmetryCandidate>& b, std::uint64_t seed) {
  std::vector<SymmetryCandidate> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const std::size_t r = candidate_rank(sys, both, seed);
  return r == candidate_rank(sys, a, seed) && r == candidate_rank(sys, b, seed);
}

SolutionSet solve_determining(const SystemModel& sys, const AnsatzTemplate& tmpl, const SolveOptions& opts) {
  Expr det = determining_expression(sys, generic_candidate(sys));
  return solve_determining(sys, separate(sys, det), tmpl, opts);
}

SolutionSet solve_determining(const SystemModel& sys, const DeterminingSystem& det, const AnsatzTemplate& tmpl,
                              const SolveOptions& opts) {
  tmpl.validate(sys);
  Context ctx{sys, {}, {}, {}, {}, {}, opts, {}};
  const auto fnames = unknown_function_names(sys);

  // Unknown coefficients, in the order of the unknown functions.
  std::vector<Unknown> unknowns;
  Bindings fbind;
  for (const auto& f : fnames) {
    auto it = tmpl.basis.find(f);
    std::vector<Expr> parts;
    if (it != tmpl.basis.end()) {
      for (const auto& b : it->second) {
        std::string name = "k" + std::to_string(unknowns.size() + 1);
        while (sys.find_param(name)) name = "_" + name;
        Expr k = Expr::symbol(name, SymbolKind::Coefficient);
        unknowns.push_back({f, b, k});
        parts.push_back(k * b);
      }
    }
    fbind[f] = add(parts);
  }
  std::map<std::string, int> index_of;
  for (std::size_t i = 0; i < unknowns.size(); ++i) index_of[unknowns[i].symbol.name()] = static_cast<int>(i);

  // Parameters and rates as polynomial variables.
  for (std::size_t i = 0; i < sys.params.size(); ++i) {
    int v = ctx.atoms.id(Expr::parameter(sys.params[i].name));
    ctx.param_rank[v] = static_cast<int>(i);
    if (sys.params[i].sign != 0) ctx.sign[v] = sys.params[i].sign;
  }
  for (const auto& r : tmpl.rate_symbols()) ctx.rate_vars.insert(ctx.atoms.id(unknown_rate(r)));

  // Sums that occur as denominators in the model are nonzero.
  std::function<void(const Expr&)> scan = [&](const Expr& e) {
    if (e.is_mul()) {
      for (const auto& f : e.factors()) {
        if (f.base.is_add() && has_negative_sign(f.exponent)) {
          bool params_only = true;
          for (const auto& s : f.base.free_symbols())
            if (!sys.find_param(s)) params_only = false;
          if (params_only) {
            RatFunc r = to_ratfunc(f.base, ctx.atoms);
            for (const auto& g : partial_factors(r.num())) ctx.model_nonzero.push_back(g);
          }
        }
        scan(f.base);
        scan(f.exponent);
      }
    } else if (e.is_add()) {
      for (const auto& t : e.terms()) scan(t.monomial);
    } else if (e.is_func()) {
      scan(e.arg());
    }
  };
  scan(sys.H);
  for (const auto& [p, g] : sys.gamma) scan(g);
  for (const auto& c : sys.controls) scan(c.relation);

  // Linear rows: one per (separation monomial, function of t and states).
  std::set<std::string> fvars{SystemModel::time};
  for (const auto& q : sys.states()) fvars.insert(q);
  std::map<std::pair<std::size_t, Expr>, std::map<int, std::vector<Expr>>,
           bool (*)(const std::pair<std::size_t, Expr>&, const std::pair<std::size_t, Expr>&)>
      grouped([](const std::pair<std::size_t, Expr>& a, const std::pair<std::size_t, Expr>& b) {
        if (a.first != b.first) return a.first < b.first;
        return compare(a.second, b.second) < 0;
      });
  for (std::size_t ri = 0; ri < det.residuals.size(); ++ri) {
    Expr e = reduce_trig_squares(substitute(det.residuals[ri].second, fbind));
    for (const auto& term : additive_terms(e)) {
      if (term.is_zero_literal()) continue;
      int idx = -1;
      std::vector<Expr> fpart, cpart;
      for (const auto& f : multiplicative_factors(term)) {
        if (f.is_symbol() && f.symbol_kind() == SymbolKind::Coefficient && index_of.count(f.name())) {
          if (idx >= 0) throw Error("internal: template substitution is not linear");
          idx = index_of.at(f.name());
        } else if (f.depends_on_any(fvars)) {
          fpart.push_back(f);
        } else {
          cpart.push_back(f);
        }
      }
      if (idx < 0) throw Error("internal: determining residual has a term free of unknowns: " + render(term));
      grouped[{ri, mul(fpart)}][idx].push_back(mul(cpart));
    }
  }
  std::vector<SparseRow> rows;
  for (const auto& [key, entries] : grouped) {
    SparseRow row;
    for (const auto& [idx, parts] : entries) {
      RatFunc r = to_ratfunc(add(parts), ctx.atoms);
      if (!r.is_zero()) row.emplace(idx, r);
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < ctx.atoms.size(); ++i)
    if (ctx.atoms.atom(static_cast<int>(i)).depends_on_any(fvars))
      throw Error("internal: coefficient depends on t or a state");

  // Independent blocks of unknowns.
  std::vector<int> parent(unknowns.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& row : rows)
    for (const auto& [c, v] : row) parent[find(c)] = find(row.begin()->first);
  std::map<int, std::vector<int>> blocks;
  for (std::size_t i = 0; i < unknowns.size(); ++i) blocks[find(static_cast<int>(i))].push_back(static_cast<int>(i));

  std::vector<BranchResult> results;
  for (const auto& [root, members] : blocks) {
    std::vector<SparseRow> block_rows;
    for (const auto& row : rows)
      if (find(row.begin()->first) == root) block_rows.push_back(row);
    std::deque<Branch> queue{Branch{}};
    while (!queue.empty()) {
      Branch br = std::move(queue.front());
      queue.pop_front();
      if (auto res = run_branch(ctx, std::move(br), block_rows, members, queue)) results.push_back(std::move(*res));
    }
  }

  // Operators per branch, merged by constraint set.
  SolutionSet out;
  out.unknowns = unknowns.size();
  out.equations = rows.size();
  out.rejected = ctx.rejected;
  std::map<std::string, std::size_t> branch_of;
  out.branches.emplace_back();
  branch_of[""] = 0;
  std::vector<std::set<std::string>> assumption_sets(1);
  for (const auto& res : results) {
    Bindings subs;
    Bindings rates;
    ConstraintSet constraints;
    Bindings param_values;
    for (const auto& [v, val] : res.branch.subs) {
      const std::string& n = ctx.atoms.atom(v).name();
      subs[n] = ctx.expr(val);
      if (ctx.rate_vars.count(v)) {
        rates[n] = subs[n];
      } else {
        param_values[n] = subs[n];
        constraints.add(Expr::parameter(n) - subs[n]);
      }
    }
    for (const auto& r : tmpl.rate_symbols())
      if (!subs.count(r)) rates[r] = unknown_rate(r);
    std::string key = relations_key(constraints);
    if (!branch_of.count(key)) {
      branch_of[key] = out.branches.size();
      SolutionBranch sb;
      sb.constraints = constraints;
      sb.substitutions = param_values;
      out.branches.push_back(sb);
      assumption_sets.emplace_back();
    }
    std::size_t bi = branch_of[key];
    SolutionBranch& sb = out.branches[bi];
    for (const auto& p : res.branch.nonzero) assumption_sets[bi].insert(render(ctx.expr(p)) + " != 0");
    for (const auto& vec : res.kernel) {
      SparseRow v = tidy(vec);
      std::map<std::string, std::vector<Expr>> parts;
      Bindings used_rates;
      for (const auto& [c, x] : v) {
        const Unknown& u = unknowns[static_cast<std::size_t>(c)];
        parts[u.function].push_back(ctx.expr(x) * substitute(u.basis, subs));
        for (const auto& [r, val] : rates)
          if (u.basis.depends_on(r)) used_rates[r] = val;
      }
      SymmetryCandidate cand;
      cand.xi = add(parts[fnames.front()]);
      for (std::size_t i = 0; i < sys.pairs.size(); ++i) cand.eta[sys.pairs[i].q] = add(parts[fnames[i + 1]]);
      cand.B = add(parts[fnames.back()]);
      OperatorSolution os;
      os.op = cand;
      os.rates = used_rates;
      os.trivial = is_trivial(sys, cand);
      sb.operators.push_back(os);
    }
  }
  for (std::size_t bi = 0; bi < out.branches.size(); ++bi)
    out.branches[bi].assumptions.assign(assumption_sets[bi].begin(), assumption_sets[bi].end());
  std::stable_sort(out.branches.begin() + 1, out.branches.end(), [](const SolutionBranch& x, const SolutionBranch& y) {
    return x.constraints.relations().size() < y.constraints.relations().size();
  });

  // Drop dependent operators, trivial ones first. Operators of a more general
  // branch also hold in a branch whose constraints imply its relations.
  std::vector<SolutionBranch> kept_branches;
  for (std::size_t bi = 0; bi < out.branches.size(); ++bi) {
    SolutionBranch& sb = out.branches[bi];
    std::stable_partition(sb.operators.begin(), sb.operators.end(), [](const OperatorSolution& o) { return o.trivial; });
    std::vector<SymmetryCandidate> basis;
    for (const auto& general : kept_branches) {
      bool implied = true;
      for (const auto& rel : general.constraints.relations())
        if (!normal(substitute(rel, sb.substitutions)).is_zero_literal()) implied = false;
      if (!implied) continue;
      for (const auto& o : general.operators) basis.push_back(o.op.substituted(sb.substitutions));
    }
    std::vector<OperatorSolution> kept;
    for (auto& o : sb.operators) {
      basis.push_back(o.op);
      if (candidate_rank(sys, basis, opts.seed) < basis.size()) {
        basis.pop_back();
        continue;
      }
      if (opts.verify) o.verified = verify_candidate(sys, o.op, sb.constraints, opts.seed).pass;
      kept.push_back(o);
    }
    sb.operators = kept;
    if (bi == 0 || !kept.empty()) kept_branches.push_back(sb);
  }
  out.branches = kept_branches;
  return out;
}

// ---------------------------------------------------------------------------
// Default template

namespace {

void exponent_params(const SystemModel& sys, const Expr& e, const std::set<std::string>& states,
                     std::map<std::string, std::set<std::string>>& out) {
  if (e.is_mul()) {
    for (const auto& f : e.factors()) {
      if (f.base.is_symbol() && states.count(f.base.name()) && !f.exponent.is_number())
        for (const auto& s : f.exponent.free_symbols())
          if (sys.find_param(s)) out[f.base.name()].insert(s);
      exponent_params(sys, f.base, states, out);
    }
  } else if (e.is_add()) {
    for (const auto& t : e.terms()) exponent_params(sys, t.monomial, states, out);
  } else if (e.is_func()) {
    exponent_params(sys, e.arg(), states, out);
  }
}

void monomials(const std::vector<std::string>& states, std::size_t i, int budget, const Expr& acc,
               std::vector<Expr>& out) {
  if (i == states.size()) {
    out.push_back(acc);
    return;
  }
  for (int k = 0; k <= budget; ++k)
    monomials(states, i + 1, budget - k, acc * pow(Expr::variable(states[i]), Expr(k)), out);
}

}  // namespace

AnsatzTemplate default_template(const SystemModel& sys, int degree, bool with_logs, bool with_unknown_rates) {
  if (degree < 0 || degree > 4) throw SemanticError("template degree must be between 0 and 4");
  auto states = sys.states();
  std::set<std::string> state_set(states.begin(), states.end());
  const Expr t = sys.t();

  std::vector<Expr> space;
  monomials(states, 0, degree, Expr(1), space);
  if (degree > 0) {
    std::map<std::string, std::set<std::string>> exps;
    exponent_params(sys, sys.H, state_set, exps);
    for (const auto& c : sys.controls) exponent_params(sys, c.relation, state_set, exps);
    for (const auto& q : states) {
      space.push_back(pow(Expr::variable(q), Expr(-1)));
      for (const auto& p : exps[q]) {
        space.push_back(pow(Expr::variable(q), Expr::parameter(p)));
        space.push_back(pow(Expr::variable(q), -Expr::parameter(p)));
      }
    }
    if (with_logs) {
      std::vector<Expr> logs;
      for (const auto& q : states)
        for (int k = 1; k <= 2; ++k)
          for (const auto& m : space) logs.push_back(m * pow(ln(Expr::variable(q)), Expr(k)));
      space.insert(space.end(), logs.begin(), logs.end());
    }
    std::vector<Expr> timed;
    for (const auto& m : space) timed.push_back(t * m);
    space.insert(space.end(), timed.begin(), timed.end());
  }

  std::vector<Expr> rates{Expr(0)};
  if (degree > 0) {
    auto add_rate = [&](const Expr& r) {
      for (const Expr& x : {r, -r})
        if (std::find(rates.begin(), rates.end(), x) == rates.end()) rates.push_back(x);
    };
    for (const auto& p : sys.params) add_rate(Expr::parameter(p.name));
    for (const auto& eq : equations_of_motion(sys)) {
      Expr lin = differentiate(eq.rhs, eq.var);
      bool constant = true;
      for (const auto& s : lin.free_symbols())
        if (!sys.find_param(s)) constant = false;
      if (!constant || lin.is_number()) continue;
      add_rate(lin);
      add_rate(2 * lin);
    }
    if (with_unknown_rates) rates.push_back(unknown_rate());
  }

  std::vector<Expr> terms;
  std::set<Expr, ExprLess> seen;
  for (const auto& r : rates)
    for (const auto& m : space) {
      Expr term = m * exp(r * t);
      if (seen.insert(term).second) terms.push_back(term);
    }
  AnsatzTemplate tmpl;
  for (const auto& f : unknown_function_names(sys)) tmpl.with(f, terms);
  return tmpl;
}

}  // namespace phm
