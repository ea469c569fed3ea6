#include "phm/integrals.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>

#include "phm/errors.hpp"

namespace phm {

ConservationReport check_conservation(const SystemModel& sys, const Expr& I, const ConstraintSet& constraints,
                                      std::uint64_t seed) {
  std::vector<Expr> unsolved;
  Bindings subs = constraints.solve(sys.param_names(), &unsolved);
  ConservationReport rep;
  rep.residual = substitute(total_derivative_on_shell(sys, I), subs);
  rep.verdict = is_zero(rep.residual, sys.sampling_domain(seed));
  if (!unsolved.empty() && rep.verdict == ZeroVerdict::Zero) rep.verdict = ZeroVerdict::Unknown;
  return rep;
}

FirstIntegral assemble_first_integral(const SystemModel& sys, const SymmetryCandidate& op,
                                      const ConstraintSet& validity, std::uint64_t seed) {
  std::vector<Expr> parts{-(op.xi * sys.H), -op.B};
  for (const auto& pr : sys.pairs) parts.push_back(sys.var(pr.p) * op.eta_of(pr.q));
  FirstIntegral fi;
  fi.I = eliminate_controls(sys, add(parts));
  fi.source = op;
  fi.validity = validity;
  fi.conservation = check_conservation(sys, fi.I, validity, seed);
  if (fi.conservation.verdict != ZeroVerdict::Zero)
    throw ConservationFailed("first integral " + render(fi.I) + " is not conserved", render(fi.conservation.residual));
  return fi;
}

Expr reduce_with_integral(const SystemModel& sys, const Expr& I, const std::string& level, const std::string& target) {
  Expr x = eliminate_controls(sys, I);
  Expr tsym = Expr::variable(target);
  std::optional<Expr> power;
  std::vector<Expr> coeff, rest;
  for (const auto& term : additive_terms(x)) {
    if (!term.depends_on(target)) {
      rest.push_back(term);
      continue;
    }
    std::optional<Expr> k;
    std::vector<Expr> others;
    for (const auto& f : multiplicative_factors(term)) {
      if (f == tsym) {
        k = Expr(1);
      } else if (f.is_mul() && f.factors().size() == 1 && f.factors()[0].base == tsym &&
                 !f.factors()[0].exponent.depends_on(target)) {
        k = f.factors()[0].exponent;
      } else if (f.depends_on(target)) {
        throw NotAffineInTarget("integral is not affine in a power of '" + target + "'");
      } else {
        others.push_back(f);
      }
    }
    if (power && *power != *k) throw NotAffineInTarget("integral mixes powers of '" + target + "'");
    power = k;
    coeff.push_back(mul(others));
  }
  if (!power) throw NotAffineInTarget("integral does not involve '" + target + "'");
  if (power->is_integer() && !power->is_one())
    throw NotAffineInTarget("integral involves '" + target + "' through an integer power other than 1");
  Expr solved = (Expr::parameter(level) - add(rest)) / add(coeff);
  if (power->is_one()) return solved;
  return pow(solved, 1 / *power);
}

namespace {

std::optional<Rational> rationalize(double x, long max_den = 1000) {
  if (!std::isfinite(x)) return std::nullopt;
  const double tol = 1e-7 * std::max(1.0, std::fabs(x));
  for (long d = 1; d <= max_den; ++d) {
    double n = std::round(x * static_cast<double>(d));
    if (std::fabs(n / static_cast<double>(d) - x) < tol) {
      Rational r(static_cast<long>(n), d);
      r.canonicalize();
      return r;
    }
  }
  return std::nullopt;
}

struct Sampler {
  const SystemModel& sys;
  SamplingDomain dom;
  std::mt19937_64 rng;
  Env params;

  Env point() {
    Env env = params;
    env[SystemModel::time] = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (const auto& v : sys.phase_variables()) {
      auto [lo, hi] = dom.range(v);
      env[v] = std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    return env;
  }
};

}  // namespace

DependenceReport dependence_rank(const SystemModel& sys, const std::vector<Expr>& integrals,
                                 const ConstraintSet& constraints, std::size_t npoints, std::uint64_t seed) {
  if (integrals.empty()) throw SemanticError("dependence_rank needs at least one integral");
  DependenceReport rep;
  rep.seed = seed;
  Bindings subs = constraints.solve(sys.param_names());
  std::vector<Expr> Is;
  for (const auto& I : integrals) Is.push_back(substitute(eliminate_controls(sys, I), subs));
  const auto vars = sys.phase_variables();
  std::vector<std::vector<Expr>> grads;
  for (const auto& I : Is) {
    std::vector<Expr> g;
    for (const auto& v : vars) g.push_back(differentiate(I, v));
    grads.push_back(g);
  }

  Sampler sm{sys, sys.sampling_domain(seed), std::mt19937_64(seed), {}};
  for (const auto& p : sys.params) {
    if (subs.count(p.name)) continue;
    auto [lo, hi] = sm.dom.range(p.name);
    sm.params[p.name] = std::uniform_real_distribution<double>(lo, hi)(sm.rng);
  }
  for (const auto& [n, e] : subs) sm.params[n] = eval_numeric(e, sm.params);

  // Jacobian rank, maximized over points.
  std::size_t good = 0;
  for (std::size_t attempt = 0; good < npoints && attempt < npoints * 20; ++attempt) {
    Env env = sm.point();
    try {
      Eigen::MatrixXd J(static_cast<Eigen::Index>(Is.size()), static_cast<Eigen::Index>(vars.size()));
      for (std::size_t i = 0; i < Is.size(); ++i)
        for (std::size_t j = 0; j < vars.size(); ++j)
          J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eval_numeric(grads[i][j], env);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
      const auto& s = svd.singularValues();
      std::size_t r = 0;
      for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(0) > 0 && s(k) > 1e-8 * s(0)) ++r;
      rep.rank = std::max(rep.rank, r);
      ++good;
    } catch (const DomainError&) {
    }
  }
  if (good == 0) throw DomainError("could not evaluate the integrals at any sample point");
  if (rep.rank == Is.size()) return rep;

  // Degree-2 relations: linear terms, products, then the constant.
  std::vector<Expr> names;
  for (std::size_t i = 0; i < Is.size(); ++i) names.push_back(Expr::variable("I" + std::to_string(i + 1)));
  std::vector<Expr> monos, values;
  for (std::size_t i = 0; i < Is.size(); ++i) {
    monos.push_back(names[i]);
    values.push_back(Is[i]);
  }
  for (std::size_t i = 0; i < Is.size(); ++i)
    for (std::size_t j = i; j < Is.size(); ++j) {
      monos.push_back(names[i] * names[j]);
      values.push_back(Is[i] * Is[j]);
    }
  monos.push_back(Expr(1));
  values.push_back(Expr(1));
  const std::size_t nrows = std::max<std::size_t>(npoints, 3 * monos.size());
  Eigen::MatrixXd A(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(monos.size()));
  std::size_t filled = 0;
  for (std::size_t attempt = 0; filled < nrows && attempt < nrows * 20; ++attempt) {
    Env env = sm.point();
    try {
      std::vector<double> row;
      for (const auto& v : values) row.push_back(eval_numeric(v, env));
      for (std::size_t k = 0; k < row.size(); ++k)
        A(static_cast<Eigen::Index>(filled), static_cast<Eigen::Index>(k)) = row[k];
      ++filled;
    } catch (const DomainError&) {
    }
  }
  if (filled < nrows) {
    rep.relation_unknown = true;
    return rep;
  }
  Eigen::VectorXd scale(A.cols());
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    scale(k) = A.col(k).cwiseAbs().maxCoeff();
    if (scale(k) == 0) scale(k) = 1;
    A.col(k) /= scale(k);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) > 1e-8 * s(0)) continue;
    Eigen::VectorXd v = svd.matrixV().col(k).cwiseQuotient(scale);
    double vmax = v.cwiseAbs().maxCoeff();
    std::vector<std::size_t> support;
    for (Eigen::Index j = 0; j < v.size(); ++j)
      if (std::fabs(v(j)) > 1e-7 * vmax) support.push_back(static_cast<std::size_t>(j));
    const double lead = v(static_cast<Eigen::Index>(support.front()));
    // A symbolic ratio of two terms, otherwise rational coefficients.
    std::vector<Expr> terms, checks;
    bool rational = false;
    if (support.size() == 2) {
      Expr ratio = normal(values[support[0]] / values[support[1]]);
      std::set<std::string> fvars{SystemModel::time};
      for (const auto& x : vars) fvars.insert(x);
      if (!ratio.depends_on_any(fvars)) {
        terms = {monos[support[0]], -(ratio * monos[support[1]])};
        checks = {values[support[0]], -(ratio * values[support[1]])};
        rational = true;
      }
    }
    for (auto j : rational ? std::vector<std::size_t>{} : support) {
      auto r = rationalize(v(static_cast<Eigen::Index>(j)) / lead);
      if (!r) {
        terms.clear();
        break;
      }
      terms.push_back(*r * monos[j]);
      checks.push_back(*r * values[j]);
    }
    if (!terms.empty()) rational = true;
    if (!rational) {
      rep.relation_unknown = true;
      continue;
    }
    rep.relations.push_back(add(terms));
    rep.confirmed.push_back(is_zero(add(checks), sys.sampling_domain(seed)) == ZeroVerdict::Zero);
  }
  if (rep.relations.empty()) rep.relation_unknown = true;
  return rep;
}

}  // namespace phm
