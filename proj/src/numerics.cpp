#include "phm/numerics.hpp"

#include <quadmath.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>

#include "phm/errors.hpp"
#include "phm/integrals.hpp"

namespace phm {

namespace {

inline double m_exp(double x) { return std::exp(x); }
inline double m_log(double x) { return std::log(x); }
inline double m_sin(double x) { return std::sin(x); }
inline double m_cos(double x) { return std::cos(x); }
inline double m_pow(double x, double y) { return std::pow(x, y); }
inline bool m_finite(double x) { return std::isfinite(x); }
inline long double m_exp(long double x) { return std::exp(x); }
inline long double m_log(long double x) { return std::log(x); }
inline long double m_sin(long double x) { return std::sin(x); }
inline long double m_cos(long double x) { return std::cos(x); }
inline long double m_pow(long double x, long double y) { return std::pow(x, y); }
inline bool m_finite(long double x) { return std::isfinite(x); }
inline __float128 m_exp(__float128 x) { return expq(x); }
inline __float128 m_log(__float128 x) { return logq(x); }
inline __float128 m_sin(__float128 x) { return sinq(x); }
inline __float128 m_cos(__float128 x) { return cosq(x); }
inline __float128 m_pow(__float128 x, __float128 y) { return powq(x, y); }
inline bool m_finite(__float128 x) { return finiteq(x) != 0; }

__float128 to_quad(const Rational& r) {
  __float128 n = strtoflt128(r.get_num().get_str().c_str(), nullptr);
  __float128 d = strtoflt128(r.get_den().get_str().c_str(), nullptr);
  return n / d;
}

template <class T>
T ipow(T b, long n) {
  if (n < 0) return T(1) / ipow(b, -n);
  T r = 1;
  while (n) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < slots.size(); ++i) index[slots[i]] = static_cast<int>(i);
  emit(e, index);
  std::size_t depth = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const:
      case Op::Slot:
        ++depth;
        break;
      case Op::Add:
      case Op::Mul:
        depth -= static_cast<std::size_t>(in.arg) - 1;
        break;
      case Op::Pow:
        --depth;
        break;
      default:
        break;
    }
    max_stack_ = std::max(max_stack_, depth);
  }
  for (const auto& r : consts_) {
    consts_d_.push_back(r.get_d());
    consts_q_.push_back(to_quad(r));
    consts_ld_.push_back(static_cast<long double>(consts_q_.back()));
  }
}

std::int32_t CompiledExpr::constant(const Rational& r) {
  for (std::size_t i = 0; i < consts_.size(); ++i)
    if (consts_[i] == r) return static_cast<std::int32_t>(i);
  consts_.push_back(r);
  return static_cast<std::int32_t>(consts_.size() - 1);
}

void CompiledExpr::emit(const Expr& e, const std::map<std::string, int>& index) {
  switch (e.kind()) {
    case Expr::Kind::Number:
      code_.push_back({Op::Const, constant(e.number())});
      return;
    case Expr::Kind::Symbol: {
      auto it = index.find(e.name());
      if (it == index.end()) throw SemanticError("unbound symbol '" + e.name() + "'");
      code_.push_back({Op::Slot, it->second});
      return;
    }
    case Expr::Kind::FnApp:
      throw SemanticError("cannot evaluate undetermined function '" + e.name() + "'");
    case Expr::Kind::Func: {
      emit(e.arg(), index);
      static const Op ops[] = {Op::Exp, Op::Ln, Op::Sin, Op::Cos};
      code_.push_back({ops[static_cast<int>(e.func_kind())], 0});
      return;
    }
    case Expr::Kind::Mul: {
      std::int32_t n = 0;
      if (e.coeff() != 1) {
        code_.push_back({Op::Const, constant(e.coeff())});
        ++n;
      }
      for (const auto& f : e.factors()) {
        emit(f.base, index);
        if (f.exponent.is_integer() && f.exponent.number().get_num().fits_sint_p()) {
          auto k = static_cast<std::int32_t>(f.exponent.number().get_num().get_si());
          if (k != 1) code_.push_back({Op::PowInt, k});
        } else {
          emit(f.exponent, index);
          code_.push_back({Op::Pow, 0});
        }
        ++n;
      }
      if (n > 1) code_.push_back({Op::Mul, n});
      return;
    }
    case Expr::Kind::Add: {
      std::int32_t n = 0;
      if (e.constant() != 0) {
        code_.push_back({Op::Const, constant(e.constant())});
        ++n;
      }
      for (const auto& t : e.terms()) {
        emit(t.monomial, index);
        if (t.coeff != 1) {
          code_.push_back({Op::Const, constant(t.coeff)});
          code_.push_back({Op::Mul, 2});
        }
        ++n;
      }
      if (n > 1) code_.push_back({Op::Add, n});
      return;
    }
  }
}

template <class T>
T CompiledExpr::eval(const T* values) const {
  if (code_.empty()) return T(0);
  const T* consts;
  if constexpr (std::is_same_v<T, double>) {
    consts = consts_d_.data();
  } else if constexpr (std::is_same_v<T, long double>) {
    consts = consts_ld_.data();
  } else {
    consts = consts_q_.data();
  }
  std::array<T, 64> small;
  std::vector<T> large;
  T* st = small.data();
  if (max_stack_ > small.size()) {
    large.resize(max_stack_);
    st = large.data();
  }
  std::size_t sp = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const:
        st[sp++] = consts[in.arg];
        break;
      case Op::Slot:
        st[sp++] = values[in.arg];
        break;
      case Op::Add: {
        T s = st[sp - static_cast<std::size_t>(in.arg)];
        for (std::size_t k = sp - static_cast<std::size_t>(in.arg) + 1; k < sp; ++k) s += st[k];
        sp -= static_cast<std::size_t>(in.arg) - 1;
        st[sp - 1] = s;
        break;
      }
      case Op::Mul: {
        T s = st[sp - static_cast<std::size_t>(in.arg)];
        for (std::size_t k = sp - static_cast<std::size_t>(in.arg) + 1; k < sp; ++k) s *= st[k];
        sp -= static_cast<std::size_t>(in.arg) - 1;
        st[sp - 1] = s;
        break;
      }
      case Op::PowInt: {
        T b = st[sp - 1];
        if (b == T(0) && in.arg < 0) throw DomainError("0 raised to a negative power");
        st[sp - 1] = ipow(b, in.arg);
        break;
      }
      case Op::Pow: {
        T x = st[--sp];
        T b = st[sp - 1];
        if (b < T(0)) throw DomainError("negative base with non-integer exponent");
        if (b == T(0) && x < T(0)) throw DomainError("0 raised to a negative power");
        st[sp - 1] = m_pow(b, x);
        break;
      }
      case Op::Exp:
        st[sp - 1] = m_exp(st[sp - 1]);
        break;
      case Op::Ln:
        if (!(st[sp - 1] > T(0))) throw DomainError("ln of a non-positive value");
        st[sp - 1] = m_log(st[sp - 1]);
        break;
      case Op::Sin:
        st[sp - 1] = m_sin(st[sp - 1]);
        break;
      case Op::Cos:
        st[sp - 1] = m_cos(st[sp - 1]);
        break;
    }
  }
  return st[0];
}

template double CompiledExpr::eval<double>(const double*) const;
template long double CompiledExpr::eval<long double>(const long double*) const;
template __float128 CompiledExpr::eval<__float128>(const __float128*) const;

double Trajectory::value(std::size_t row, const std::string& var) const {
  auto it = std::find(vars.begin(), vars.end(), var);
  if (it == vars.end()) throw SemanticError("trajectory has no variable '" + var + "'");
  return static_cast<double>(states.at(row)[static_cast<std::size_t>(it - vars.begin())]);
}

std::vector<double> Trajectory::column(const std::string& var) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) out.push_back(value(i, var));
  return out;
}

ParamValues model_params(const SystemModel& sys, const ParamValues& overrides) {
  ParamValues out;
  for (const auto& p : sys.params)
    if (p.value) out[p.name] = p.value->get_d();
  for (const auto& [k, v] : overrides) {
    if (!sys.find_param(k)) throw SemanticError("unknown parameter '" + k + "'");
    out[k] = v;
  }
  return out;
}

namespace {

// Slots: t, phase variables, parameters.
std::vector<std::string> slot_names(const SystemModel& sys, const ParamValues& params) {
  std::vector<std::string> slots{SystemModel::time};
  for (const auto& v : sys.phase_variables()) slots.push_back(v);
  for (const auto& p : sys.params) {
    if (!params.count(p.name)) throw SemanticError("parameter '" + p.name + "' has no value");
    slots.push_back(p.name);
  }
  return slots;
}

template <class T>
std::vector<T> param_slots(const SystemModel& sys, const ParamValues& params) {
  std::vector<T> out;
  for (const auto& p : sys.params) out.push_back(static_cast<T>(params.at(p.name)));
  return out;
}

ParamValues initial_state(const SystemModel& sys, const ParamValues& params, const ParamValues& ic, double t0) {
  ParamValues out;
  for (const auto& v : sys.phase_variables()) {
    auto it = ic.find(v);
    if (it != ic.end()) out[v] = it->second;
  }
  for (const auto& [k, v] : ic) {
    auto vars = sys.phase_variables();
    bool is_momentum = std::find_if(sys.controls.begin(), sys.controls.end(),
                                    [&](const Control& c) { return c.momentum == k; }) != sys.controls.end();
    if (std::find(vars.begin(), vars.end(), k) == vars.end() && !is_momentum)
      throw SemanticError("initial condition for unknown variable '" + k + "'");
  }
  for (const auto& c : sys.controls) {
    auto pit = ic.find(c.momentum);
    if (pit == ic.end()) continue;
    Env env(params.begin(), params.end());
    env[SystemModel::time] = t0;
    for (const auto& [k, v] : out) env[k] = v;
    if (!out.count(c.name)) {
      Expr sol = reduce_with_integral(sys, c.relation, c.momentum + "_level", c.name);
      env[c.momentum + "_level"] = pit->second;
      out[c.name] = eval_numeric(sol, env);
      continue;
    }
    double p = eval_numeric(c.relation, env);
    if (std::fabs(p - pit->second) > 1e-9 * std::max(1.0, std::fabs(p)))
      throw SemanticError("initial value of '" + c.momentum + "' is inconsistent with control '" + c.name + "'");
  }
  for (const auto& v : sys.phase_variables())
    if (!out.count(v)) throw SemanticError("no initial value for '" + v + "'");
  return out;
}

template <class T>
void run_rk4(const std::vector<CompiledExpr>& rhs, const std::vector<T>& pvals, std::vector<T> y, double t0,
             double h, std::size_t steps, std::size_t store_every, Trajectory& traj) {
  const std::size_t n = y.size();
  std::vector<T> slots(1 + n + pvals.size());
  std::copy(pvals.begin(), pvals.end(), slots.begin() + static_cast<std::ptrdiff_t>(1 + n));
  std::vector<T> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const T th = static_cast<T>(h);
  auto f = [&](T t, const std::vector<T>& x, std::vector<T>& out) {
    slots[0] = t;
    std::copy(x.begin(), x.end(), slots.begin() + 1);
    for (std::size_t i = 0; i < n; ++i) out[i] = rhs[i].eval<T>(slots.data());
  };
  auto store = [&](std::size_t k) {
    traj.times.push_back(t0 + static_cast<double>(k) * h);
    traj.states.emplace_back(y.begin(), y.end());
  };
  store(0);
  for (std::size_t k = 0; k < steps; ++k) {
    const T t = static_cast<T>(t0) + static_cast<T>(k) * th;
    f(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + th / 2 * k1[i];
    f(t + th / 2, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + th / 2 * k2[i];
    f(t + th / 2, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + th * k3[i];
    f(t + th, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += th / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      if (!m_finite(y[i]))
        throw NonFinite("non-finite value of '" + traj.vars[i] + "' at step " + std::to_string(k + 1), k + 1);
    }
    if ((k + 1) % store_every == 0 || k + 1 == steps) store(k + 1);
  }
}

}  // namespace

Trajectory integrate(const SystemModel& sys, const ParamValues& params, const ParamValues& ic, double t0, double t1,
                     double h, const IntegrateOptions& opts) {
  if (!(h > 0)) throw SemanticError("step must be positive");
  if (t1 == t0) throw SemanticError("empty time span");
  if (opts.store_every == 0) throw SemanticError("store_every must be positive");
  const double span = t1 - t0;
  auto steps = static_cast<std::size_t>(std::ceil(std::fabs(span) / h - 1e-9));
  steps = std::max<std::size_t>(steps, 1);

  Trajectory traj;
  traj.vars = sys.phase_variables();
  traj.params = params;
  traj.h = span / static_cast<double>(steps);
  traj.precision = opts.precision;
  const auto slots = slot_names(sys, params);
  const ParamValues y0 = initial_state(sys, params, ic, t0);
  traj.ic = y0;

  std::map<std::string, Expr> rates;
  for (const auto& eq : equations_of_motion(sys)) rates[eq.var] = eq.rhs;
  std::vector<CompiledExpr> rhs;
  for (const auto& v : traj.vars) rhs.emplace_back(rates.at(v), slots);

  auto go = [&](auto zero) {
    using T = decltype(zero);
    std::vector<T> y;
    for (const auto& v : traj.vars) y.push_back(static_cast<T>(y0.at(v)));
    run_rk4<T>(rhs, param_slots<T>(sys, params), y, t0, traj.h, steps, opts.store_every, traj);
  };
  switch (opts.precision) {
    case Precision::Double:
      go(0.0);
      break;
    case Precision::LongDouble:
      go(0.0L);
      break;
    case Precision::Quad:
      go(static_cast<__float128>(0));
      break;
  }
  return traj;
}

DriftReport drift(const SystemModel& sys, const Trajectory& traj, const Expr& I) {
  if (traj.size() == 0) throw SemanticError("empty trajectory");
  const auto slots = slot_names(sys, traj.params);
  CompiledExpr f(eliminate_controls(sys, I), slots);
  auto go = [&](auto zero) {
    using T = decltype(zero);
    std::vector<T> s(slots.size());
    auto pv = param_slots<T>(sys, traj.params);
    std::copy(pv.begin(), pv.end(), s.begin() + static_cast<std::ptrdiff_t>(1 + traj.vars.size()));
    T i0 = 0, worst = 0;
    for (std::size_t r = 0; r < traj.size(); ++r) {
      s[0] = static_cast<T>(traj.times[r]);
      for (std::size_t j = 0; j < traj.vars.size(); ++j) s[1 + j] = static_cast<T>(traj.states[r][j]);
      T v = f.eval<T>(s.data());
      if (r == 0) i0 = v;
      T d = v - i0;
      if (d < 0) d = -d;
      if (d > worst) worst = d;
    }
    DriftReport rep;
    rep.initial = static_cast<double>(i0);
    rep.absolute = static_cast<double>(worst);
    rep.relative = rep.absolute / std::max(std::fabs(rep.initial), 1e-12);
    return rep;
  };
  switch (traj.precision) {
    case Precision::Double:
      return go(0.0);
    case Precision::LongDouble:
      return go(0.0L);
    case Precision::Quad:
      break;
  }
  return go(static_cast<__float128>(0));
}

double solution_residual(const SystemModel& sys, const Bindings& closed_form, const ParamValues& params,
                         const std::vector<double>& t_samples) {
  std::vector<Expr> residuals;
  for (const auto& eq : equations_of_motion(sys)) {
    auto it = closed_form.find(eq.var);
    if (it == closed_form.end()) throw SemanticError("closed form has no expression for '" + eq.var + "'");
    residuals.push_back(differentiate(it->second, SystemModel::time) - substitute(eq.rhs, closed_form));
  }
  for (const auto& c : sys.controls) {
    auto it = closed_form.find(c.momentum);
    if (it == closed_form.end()) continue;
    residuals.push_back(it->second - substitute(c.relation, closed_form));
    for (const auto& eq : raw_equations_of_motion(sys))
      if (eq.var == c.momentum)
        residuals.push_back(differentiate(it->second, SystemModel::time) - substitute(eq.rhs, closed_form));
  }
  Env env(params.begin(), params.end());
  double worst = 0;
  for (double t : t_samples) {
    env[SystemModel::time] = t;
    for (const auto& r : residuals) worst = std::max(worst, std::fabs(eval_numeric(r, env)));
  }
  return worst;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out;
  if (n == 1) return {a};
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

double convergence_order(const SystemModel& sys, const ParamValues& params, const ParamValues& ic, double t1,
                         double h) {
  const IntegrateOptions opts{Precision::LongDouble, 1000000};
  const Trajectory ref = integrate(sys, params, ic, 0, t1, h / 32, opts);
  auto final_error = [&](const Trajectory& tr) {
    double worst = 0;
    for (const auto& v : tr.vars)
      worst = std::max(worst, std::fabs(tr.value(tr.size() - 1, v) - ref.value(ref.size() - 1, v)));
    return worst;
  };
  std::vector<double> lx, ly;
  for (double k : {1.0, 0.5, 0.25}) {
    lx.push_back(std::log(h * k));
    ly.push_back(std::log(final_error(integrate(sys, params, ic, 0, t1, h * k, opts))));
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

namespace {

void judge(const SystemModel& sys, const ParamValues& params, TransversalityReport& rep) {
  bool all_zero = true;
  for (const auto& [t, v] : rep.trace) all_zero = all_zero && v == 0;
  if (all_zero) {
    rep.decaying = true;
  } else {
    bool monotone = true;
    for (std::size_t i = 1; i < rep.trace.size(); ++i)
      monotone = monotone && std::fabs(rep.trace[i].second) < std::fabs(rep.trace[i - 1].second);
    rep.decaying = monotone && std::fabs(rep.trace.back().second) < 1e-6 * std::fabs(rep.trace.front().second);
  }
  const bool growth = sys.find_param("rho") && sys.find_param("m") && sys.find_param("sigma") &&
                      sys.find_param("phi") && sys.has_controls();
  if (growth && params.count("rho") && params.count("m") && params.count("sigma") && params.count("phi"))
    rep.criterion = params.at("rho") + params.at("m") * (params.at("sigma") - 1) * (params.at("phi") + 1);
}

}  // namespace

TransversalityReport transversality_limit(const SystemModel& sys, const Expr& e, const Bindings& path,
                                          const ParamValues& params, double t_max) {
  TransversalityReport rep;
  Expr x = substitute(e, path);
  Env env(params.begin(), params.end());
  for (double t : {t_max / 4, t_max / 2, t_max}) {
    env[SystemModel::time] = t;
    rep.trace.emplace_back(t, eval_numeric(x, env));
  }
  judge(sys, params, rep);
  return rep;
}

TransversalityReport transversality_limit(const SystemModel& sys, const Expr& e, const Trajectory& traj) {
  if (traj.size() == 0) throw SemanticError("empty trajectory");
  TransversalityReport rep;
  const auto slots = slot_names(sys, traj.params);
  CompiledExpr f(eliminate_controls(sys, e), slots);
  const double t0 = traj.times.front();
  const double t_max = traj.times.back();
  std::vector<double> s(slots.size());
  std::size_t j = 1 + traj.vars.size();
  for (const auto& p : sys.params) s[j++] = traj.params.at(p.name);
  for (double target : {t0 + (t_max - t0) / 4, t0 + (t_max - t0) / 2, t_max}) {
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), target);
    std::size_t r = std::min(static_cast<std::size_t>(it - traj.times.begin()), traj.size() - 1);
    if (r > 0 && std::fabs(traj.times[r - 1] - target) < std::fabs(traj.times[r] - target)) --r;
    s[0] = traj.times[r];
    for (std::size_t k = 0; k < traj.vars.size(); ++k) s[1 + k] = static_cast<double>(traj.states[r][k]);
    rep.trace.emplace_back(traj.times[r], f(s));
  }
  judge(sys, traj.params, rep);
  return rep;
}

void write_csv(std::ostream& os, const SystemModel& sys, const Trajectory& traj) {
  const auto slots = slot_names(sys, traj.params);
  std::vector<CompiledExpr> extra;
  os << "t";
  for (const auto& v : traj.vars) os << "," << v;
  for (const auto& c : sys.controls) {
    os << "," << c.momentum;
    extra.emplace_back(c.relation, slots);
  }
  os << "\n";
  std::vector<double> s(slots.size());
  std::size_t j = 1 + traj.vars.size();
  for (const auto& p : sys.params) s[j++] = traj.params.at(p.name);
  os << std::setprecision(17);
  for (std::size_t r = 0; r < traj.size(); ++r) {
    s[0] = traj.times[r];
    os << traj.times[r];
    for (std::size_t k = 0; k < traj.vars.size(); ++k) {
      s[1 + k] = static_cast<double>(traj.states[r][k]);
      os << "," << s[1 + k];
    }
    for (const auto& f : extra) os << "," << f(s);
    os << "\n";
  }
}

}  // namespace phm
