#include "phm/hamsys.hpp"

#include <algorithm>
#include <set>

#include "phm/errors.hpp"
#include "phm/poly.hpp"

namespace phm {

// ---------------------------------------------------------------------------
// Constraints

Expr normalize_relation(const Expr& relation) {
  AtomTable atoms;
  RatFunc r = to_ratfunc(relation, atoms);
  return to_expr(r.num().monic(), atoms);
}

namespace {

struct LinearSolution {
  Expr value;
  bool constant_coeff = false;
};

std::optional<LinearSolution> linear_in(const Expr& relation, const std::string& param) {
  AtomTable atoms;
  RatFunc r = to_ratfunc(relation, atoms);
  auto id = atoms.find(Expr::parameter(param));
  if (!id) return std::nullopt;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (static_cast<int>(i) != *id && atoms.atom(static_cast<int>(i)).depends_on(param)) return std::nullopt;
  if (r.den().degree(*id) != 0 || r.num().degree(*id) != 1) return std::nullopt;
  auto cs = r.num().coeffs(*id);
  const Poly& c1 = cs.at(1);
  Poly c0 = cs.count(0) ? cs.at(0) : Poly();
  RatFunc value = RatFunc(-c0) / RatFunc(c1);
  return LinearSolution{to_expr(value, atoms), c1.is_constant()};
}

}  // namespace

std::optional<Expr> solve_linear(const Expr& relation, const std::string& param) {
  auto s = linear_in(relation, param);
  if (!s) return std::nullopt;
  return s->value;
}

bool ConstraintSet::add(const Expr& relation) {
  Expr n = normalize_relation(relation);
  if (n.is_zero_literal()) return false;
  for (const auto& r : relations_)
    if (r == n) return false;
  relations_.push_back(n);
  return true;
}

void ConstraintSet::add_positive(const Expr& e) {
  for (const auto& r : positive_)
    if (r == e) return;
  positive_.push_back(e);
}

void ConstraintSet::merge(const ConstraintSet& other) {
  for (const auto& r : other.relations_) add(r);
  for (const auto& r : other.positive_) add_positive(r);
}

Bindings ConstraintSet::solve(const std::vector<std::string>& param_order, std::vector<Expr>* unsolved) const {
  Bindings out;
  for (const auto& rel : relations_) {
    Expr r = substitute(rel, out);
    if (normal(r).is_zero_literal()) continue;
    std::optional<std::pair<std::string, LinearSolution>> best;
    int best_rank = -1;
    for (std::size_t i = 0; i < param_order.size(); ++i) {
      const auto& name = param_order[i];
      if (!r.depends_on(name)) continue;
      auto s = linear_in(r, name);
      if (!s) continue;
      int rank = static_cast<int>(i) + (s->constant_coeff ? 1000 : 0);
      if (rank > best_rank) {
        best_rank = rank;
        best = std::make_pair(name, *s);
      }
    }
    if (!best) {
      if (unsolved) unsolved->push_back(r);
      continue;
    }
    Bindings one{{best->first, best->second.value}};
    for (auto& [k, v] : out) v = normal(substitute(v, one));
    out.emplace(best->first, best->second.value);
  }
  return out;
}

std::vector<std::string> ConstraintSet::str() const {
  std::vector<std::string> out;
  for (const auto& r : relations_) out.push_back(render(r) + " = 0");
  for (const auto& r : positive_) out.push_back(render(r) + " > 0");
  return out;
}

// ---------------------------------------------------------------------------
// Model

Expr SystemModel::gamma_of(const std::string& momentum) const {
  auto it = gamma.find(momentum);
  return it == gamma.end() ? Expr() : it->second;
}

std::vector<std::string> SystemModel::states() const {
  std::vector<std::string> out;
  for (const auto& pr : pairs) out.push_back(pr.q);
  return out;
}

std::vector<std::string> SystemModel::momenta() const {
  std::vector<std::string> out;
  for (const auto& pr : pairs) out.push_back(pr.p);
  return out;
}

std::vector<std::string> SystemModel::control_names() const {
  std::vector<std::string> out;
  for (const auto& c : controls) out.push_back(c.name);
  return out;
}

std::vector<std::string> SystemModel::param_names() const {
  std::vector<std::string> out;
  for (const auto& p : params) out.push_back(p.name);
  return out;
}

const ParamDecl* SystemModel::find_param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

const Control* SystemModel::control_for(const std::string& momentum) const {
  for (const auto& c : controls)
    if (c.momentum == momentum) return &c;
  return nullptr;
}

std::vector<std::string> SystemModel::phase_variables() const {
  std::vector<std::string> out = states();
  for (const auto& pr : pairs) {
    const Control* c = control_for(pr.p);
    out.push_back(c ? c->name : pr.p);
  }
  return out;
}

SymbolTable SystemModel::symbol_table() const {
  SymbolTable t;
  t.declare(time, SymbolKind::Variable);
  for (const auto& p : params) t.declare(p.name, SymbolKind::Parameter);
  for (const auto& pr : pairs) {
    t.declare(pr.q, SymbolKind::Variable);
    t.declare(pr.p, SymbolKind::Variable);
  }
  for (const auto& c : controls) t.declare(c.name, SymbolKind::Variable);
  return t;
}

SamplingDomain SystemModel::sampling_domain(std::uint64_t seed) const {
  SamplingDomain d;
  d.seed = seed;
  for (const auto& p : params) {
    if (p.sign > 0) d.declare_positive(p.name);
    if (p.sign < 0) d.declare_negative(p.name);
  }
  return d;
}

void SystemModel::validate() const {
  if (pairs.empty()) throw SemanticError("model '" + name + "' declares no canonical pairs");
  std::set<std::string> names{time};
  auto claim = [&](const std::string& n, const char* what) {
    if (!names.insert(n).second) throw SemanticError(std::string("duplicate ") + what + " '" + n + "'");
  };
  for (const auto& p : params) claim(p.name, "parameter");
  for (const auto& pr : pairs) {
    claim(pr.q, "pair variable");
    claim(pr.p, "pair variable");
  }
  for (const auto& c : controls) claim(c.name, "control");

  std::set<std::string> momenta_set;
  for (const auto& pr : pairs) momenta_set.insert(pr.p);
  auto check_symbols = [&](const Expr& e, const std::string& where) {
    for (const auto& s : e.free_symbols())
      if (!names.count(s)) throw SemanticError("undeclared symbol '" + s + "' in " + where);
  };
  check_symbols(H, "H");
  for (const auto& [p, g] : gamma) {
    if (!momenta_set.count(p)) throw SemanticError("Gamma given for '" + p + "', which is not a momentum");
    check_symbols(g, "Gamma[" + p + "]");
  }
  std::set<std::string> controlled;
  for (const auto& c : controls) {
    if (!momenta_set.count(c.momentum))
      throw SemanticError("control '" + c.name + "' is tied to '" + c.momentum + "', which is not a momentum");
    if (!controlled.insert(c.momentum).second)
      throw SemanticError("momentum '" + c.momentum + "' has more than one control");
    check_symbols(c.relation, "control relation");
    for (const auto& m : momenta_set)
      if (c.relation.depends_on(m)) throw SemanticError("control relation for '" + c.name + "' involves a momentum");
    if (!c.relation.depends_on(c.name))
      throw SemanticError("control relation for '" + c.name + "' does not involve the control");
  }
  std::set<std::string> sep_ok = momenta_set;
  for (const auto& c : controls) sep_ok.insert(c.name);
  for (const auto& v : separation_vars)
    if (!sep_ok.count(v)) throw SemanticError("separation variable '" + v + "' is not a momentum or control");
  for (const auto& r : constraints.relations())
    for (const auto& s : r.free_symbols())
      if (!find_param(s)) throw SemanticError("constraint involves non-parameter '" + s + "'");
}

// ---------------------------------------------------------------------------
// Dynamics

Expr eliminate_controls(const SystemModel& sys, const Expr& e) {
  if (!sys.has_controls()) return e;
  Bindings b;
  for (const auto& c : sys.controls) b.emplace(c.momentum, c.relation);
  return substitute(e, b);
}

std::vector<MotionEquation> raw_equations_of_motion(const SystemModel& sys) {
  std::vector<MotionEquation> out;
  for (const auto& pr : sys.pairs) out.push_back({pr.q, differentiate(sys.H, pr.p)});
  for (const auto& pr : sys.pairs)
    out.push_back({pr.p, -differentiate(sys.H, pr.q) + sys.gamma_of(pr.p)});
  return out;
}

Expr control_rate(const SystemModel& sys, const Control& control) {
  const Expr& f = control.relation;
  Expr fc = differentiate(f, control.name);
  if (fc.is_zero_literal()) throw ControlRateUnsolvable("relation for '" + control.name + "' does not determine its rate");
  const CanonicalPair* pair = nullptr;
  for (const auto& pr : sys.pairs)
    if (pr.p == control.momentum) pair = &pr;
  Expr pdot = eliminate_controls(sys, -differentiate(sys.H, pair->q) + sys.gamma_of(pair->p));
  std::vector<Expr> rest{pdot, -differentiate(f, SystemModel::time)};
  for (const auto& pr : sys.pairs) {
    Expr fq = differentiate(f, pr.q);
    if (fq.is_zero_literal()) continue;
    rest.push_back(-(fq * eliminate_controls(sys, differentiate(sys.H, pr.p))));
  }
  for (const auto& other : sys.controls)
    if (other.name != control.name && f.depends_on(other.name))
      throw ControlRateUnsolvable("relation for '" + control.name + "' couples several controls");
  return add(rest) / fc;
}

std::vector<MotionEquation> equations_of_motion(const SystemModel& sys) {
  if (!sys.has_controls()) return raw_equations_of_motion(sys);
  std::vector<MotionEquation> out;
  for (const auto& pr : sys.pairs) out.push_back({pr.q, eliminate_controls(sys, differentiate(sys.H, pr.p))});
  for (const auto& pr : sys.pairs) {
    if (const Control* c = sys.control_for(pr.p)) {
      out.push_back({c->name, control_rate(sys, *c)});
    } else {
      out.push_back({pr.p, eliminate_controls(sys, -differentiate(sys.H, pr.q) + sys.gamma_of(pr.p))});
    }
  }
  return out;
}

Expr total_derivative_on_shell(const SystemModel& sys, const Expr& e) {
  Expr x = eliminate_controls(sys, e);
  std::vector<Expr> parts{differentiate(x, SystemModel::time)};
  for (const auto& eq : equations_of_motion(sys)) {
    Expr d = differentiate(x, eq.var);
    if (!d.is_zero_literal()) parts.push_back(d * eq.rhs);
  }
  return add(parts);
}

}  // namespace phm
