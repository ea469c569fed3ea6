#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "phm/hamsys.hpp"

namespace phm {

enum class Precision { Double, LongDouble, Quad };

// Expression compiled to a postfix program over numbered slots.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  // Every free symbol of `e` must be in `slots`; throws SemanticError.
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots);

  template <class T>
  T eval(const T* values) const;
  double operator()(const std::vector<double>& values) const { return eval<double>(values.data()); }

  enum class Op : std::uint8_t { Const, Slot, Add, Mul, PowInt, Pow, Exp, Ln, Sin, Cos };
  struct Instr {
    Op op;
    std::int32_t arg = 0;  // slot, constant index, operand count or exponent
  };

 private:
  void emit(const Expr& e, const std::map<std::string, int>& index);
  std::int32_t constant(const Rational& r);

  std::vector<Instr> code_;
  std::vector<Rational> consts_;
  std::vector<double> consts_d_;
  std::vector<long double> consts_ld_;
  std::vector<__float128> consts_q_;
  std::size_t max_stack_ = 0;
};

using ParamValues = std::map<std::string, double>;

struct Trajectory {
  std::vector<std::string> vars;  // phase variables
  std::vector<double> times;
  std::vector<std::vector<__float128>> states;  // per time, in `vars` order
  ParamValues params;
  ParamValues ic;
  double h = 0;
  std::string scheme = "rk4";
  Precision precision = Precision::Double;

  std::size_t size() const { return times.size(); }
  double value(std::size_t row, const std::string& var) const;
  std::vector<double> column(const std::string& var) const;
};

struct IntegrateOptions {
  Precision precision = Precision::Double;
  std::size_t store_every = 1;
};

// Classical RK4 on the equations of motion. `ic` binds every phase variable;
// a controlled momentum may be given instead of its control. Integrates
// backwards when t1 < t0. The step is h shortened to divide the span evenly.
Trajectory integrate(const SystemModel& sys, const ParamValues& params, const ParamValues& ic, double t0, double t1,
                     double h, const IntegrateOptions& opts = {});

// Parameter values declared in the model, overridden by `overrides`.
ParamValues model_params(const SystemModel& sys, const ParamValues& overrides = {});

struct DriftReport {
  double relative = 0;  // max |I(t) - I(0)| / max(|I(0)|, 1e-12)
  double absolute = 0;
  double initial = 0;
};

// Evaluated in the trajectory's precision; controls are eliminated first.
DriftReport drift(const SystemModel& sys, const Trajectory& traj, const Expr& I);

// Max over samples of |d/dt x - rhs| for every phase variable. A closed form
// that also gives a controlled momentum is checked against the momentum
// equation and the control relation.
double solution_residual(const SystemModel& sys, const Bindings& closed_form, const ParamValues& params,
                         const std::vector<double>& t_samples);

std::vector<double> linspace(double a, double b, std::size_t n);

// Least-squares slope of log(final state error) against log(h) for h, h/2,
// h/4 against a reference run at h/32, in long double.
double convergence_order(const SystemModel& sys, const ParamValues& params, const ParamValues& ic, double t1,
                         double h = 1e-2);

struct TransversalityReport {
  bool decaying = false;
  std::vector<std::pair<double, double>> trace;  // (t, e) at t_max/4, t_max/2, t_max
  std::optional<double> criterion;  // rho + m(sigma - 1)(phi + 1) for the growth model
  bool criterion_holds() const { return criterion && *criterion > 0; }
};

// `e` evaluated along a path given as expressions of t.
TransversalityReport transversality_limit(const SystemModel& sys, const Expr& e, const Bindings& path,
                                          const ParamValues& params, double t_max);
// `e` evaluated along an integrated trajectory (nearest stored times).
TransversalityReport transversality_limit(const SystemModel& sys, const Expr& e, const Trajectory& traj);

// Header `t,<vars>` plus reconstructed controlled momenta, 17 significant digits.
void write_csv(std::ostream& os, const SystemModel& sys, const Trajectory& traj);

}  // namespace phm
