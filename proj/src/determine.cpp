#include "phm/determine.hpp"

#include "phm/errors.hpp"

namespace phm {

Expr SymmetryCandidate::eta_of(const std::string& q) const {
  auto it = eta.find(q);
  return it == eta.end() ? Expr() : it->second;
}

SymmetryCandidate SymmetryCandidate::operator+(const SymmetryCandidate& o) const {
  SymmetryCandidate r = *this;
  r.xi = xi + o.xi;
  r.B = B + o.B;
  for (const auto& [q, e] : o.eta) r.eta[q] = r.eta_of(q) + e;
  return r;
}

SymmetryCandidate SymmetryCandidate::scaled(const Expr& c) const {
  SymmetryCandidate r = *this;
  r.xi = xi * c;
  r.B = B * c;
  for (auto& [q, e] : r.eta) e = e * c;
  return r;
}

SymmetryCandidate SymmetryCandidate::substituted(const Bindings& b) const {
  SymmetryCandidate r = *this;
  r.xi = substitute(xi, b);
  r.B = substitute(B, b);
  for (auto& [q, e] : r.eta) e = substitute(e, b);
  return r;
}

bool SymmetryCandidate::is_zero() const {
  if (!xi.is_zero_literal() || !B.is_zero_literal()) return false;
  for (const auto& [q, e] : eta)
    if (!e.is_zero_literal()) return false;
  return true;
}

std::vector<std::string> unknown_function_names(const SystemModel& sys) {
  std::vector<std::string> out{"xi"};
  if (sys.pairs.size() == 1) {
    out.push_back("eta");
  } else {
    for (std::size_t i = 0; i < sys.pairs.size(); ++i) out.push_back("eta" + std::to_string(i + 1));
  }
  out.push_back("B");
  return out;
}

SymmetryCandidate generic_candidate(const SystemModel& sys) {
  std::vector<std::string> args{SystemModel::time};
  for (const auto& q : sys.states()) args.push_back(q);
  auto names = unknown_function_names(sys);
  SymmetryCandidate c;
  c.xi = fn_app(names.front(), args, {});
  for (std::size_t i = 0; i < sys.pairs.size(); ++i) c.eta[sys.pairs[i].q] = fn_app(names[i + 1], args, {});
  c.B = fn_app(names.back(), args, {});
  return c;
}

Expr DeterminingSystem::reconstruct() const {
  std::vector<Expr> parts;
  for (const auto& [k, r] : residuals) parts.push_back(k.monomial() * r);
  return add(parts);
}

Expr determining_expression(const SystemModel& sys, const SymmetryCandidate& cand) {
  std::map<std::string, Expr> qdot;
  for (const auto& pr : sys.pairs) qdot[pr.q] = differentiate(sys.H, pr.p);
  auto D = [&](const Expr& f) {
    std::vector<Expr> parts{differentiate(f, SystemModel::time)};
    for (const auto& [q, rate] : qdot) {
      Expr d = differentiate(f, q);
      if (!d.is_zero_literal()) parts.push_back(d * rate);
    }
    return add(parts);
  };
  for (const auto& v : sys.separation_vars) {
    auto check = [&](const Expr& e) {
      if (e.depends_on(v))
        throw SemanticError("symmetry candidate depends on separation variable '" + v + "'");
    };
    check(cand.xi);
    check(cand.B);
    for (const auto& [q, e] : cand.eta) check(e);
  }
  std::vector<Expr> parts;
  parts.push_back(-(cand.xi * differentiate(sys.H, SystemModel::time)));
  parts.push_back(-(sys.H * D(cand.xi)));
  parts.push_back(-D(cand.B));
  for (const auto& pr : sys.pairs) {
    Expr eta = cand.eta_of(pr.q);
    parts.push_back(sys.var(pr.p) * D(eta));
    parts.push_back(-(eta * differentiate(sys.H, pr.q)));
    Expr g = sys.gamma_of(pr.p);
    if (!g.is_zero_literal()) parts.push_back((eta - cand.xi * qdot[pr.q]) * g);
  }
  return eliminate_controls(sys, add(parts));
}

DeterminingSystem separate(const SystemModel& sys, const Expr& det) {
  DeterminingSystem out;
  out.model = sys.name;
  out.unknown_functions = unknown_function_names(sys);
  for (auto& [k, r] : collect_by(det, sys.separation_vars)) out.residuals.emplace_back(k, r);
  return out;
}

VerifyReport verify_candidate(const SystemModel& sys, const SymmetryCandidate& cand, const ConstraintSet& constraints,
                              std::uint64_t seed) {
  VerifyReport rep;
  std::vector<Expr> unsolved;
  rep.substitutions = constraints.solve(sys.param_names(), &unsolved);
  for (const auto& u : unsolved) rep.unsolved_constraints.push_back(render(u) + " = 0");
  Expr det = determining_expression(sys, cand);
  det = substitute(det, rep.substitutions);
  DeterminingSystem ds = separate(sys, det);
  SamplingDomain dom = sys.sampling_domain(seed);
  for (const auto& [k, r] : ds.residuals) {
    ZeroVerdict v = is_zero(r, dom);
    rep.verdicts.emplace_back(k.str(), v);
    if (v != ZeroVerdict::Zero) {
      rep.pass = false;
      rep.failures.emplace_back(k.str(), render(r));
    }
  }
  if (!rep.unsolved_constraints.empty()) rep.pass = false;
  return rep;
}

}  // namespace phm
