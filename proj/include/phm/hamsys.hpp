#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phm/analysis.hpp"
#include "phm/expr.hpp"
#include "phm/parse.hpp"

namespace phm {

struct ParamDecl {
  std::string name;
  int sign = 0;  // +1: declared > 0, -1: declared < 0
  std::optional<Rational> value;
};

struct CanonicalPair {
  std::string q;
  std::string p;
};

// A control variable tied to a momentum by p = relation(t, q, control).
struct Control {
  std::string name;
  std::string momentum;
  Expr relation;
};

// Parameter relations (each = 0) plus strict sign conditions (expr > 0).
class ConstraintSet {
 public:
  const std::vector<Expr>& relations() const { return relations_; }
  const std::vector<Expr>& positive() const { return positive_; }
  bool empty() const { return relations_.empty() && positive_.empty(); }

  // Returns false if an equal relation (up to a constant factor) is present.
  bool add(const Expr& relation);
  void add_positive(const Expr& e);
  void merge(const ConstraintSet& other);

  // Solves the relations one after another for a parameter in which each is
  // linear, preferring constant coefficients and later-declared parameters.
  // Relations that cannot be solved are returned in `unsolved`.
  Bindings solve(const std::vector<std::string>& param_order, std::vector<Expr>* unsolved = nullptr) const;

  std::vector<std::string> str() const;

 private:
  std::vector<Expr> relations_;
  std::vector<Expr> positive_;
};

// Normalizes a relation so that equal relations compare equal: clears
// denominators and scales the leading term to 1.
Expr normalize_relation(const Expr& relation);

// Solves `relation` = 0 for `param` if it is linear in it.
std::optional<Expr> solve_linear(const Expr& relation, const std::string& param);

struct SystemModel {
  std::string name;
  std::vector<ParamDecl> params;
  std::vector<CanonicalPair> pairs;
  Expr H;
  std::map<std::string, Expr> gamma;  // by momentum, absent means 0
  std::vector<Control> controls;
  std::vector<std::string> separation_vars;
  ConstraintSet constraints;

  static constexpr const char* time = "t";

  Expr t() const { return Expr::variable(time); }
  Expr var(const std::string& name) const { return Expr::variable(name); }
  Expr param(const std::string& name) const { return Expr::parameter(name); }
  Expr gamma_of(const std::string& momentum) const;

  std::vector<std::string> states() const;
  std::vector<std::string> momenta() const;
  std::vector<std::string> control_names() const;
  std::vector<std::string> param_names() const;
  const ParamDecl* find_param(const std::string& name) const;
  const Control* control_for(const std::string& momentum) const;
  bool has_controls() const { return !controls.empty(); }

  // Variables of the phase space the model is integrated in: states and
  // momenta, with a controlled momentum replaced by its control.
  std::vector<std::string> phase_variables() const;

  SymbolTable symbol_table() const;
  SamplingDomain sampling_domain(std::uint64_t seed = 42) const;

  // Checks declarations; throws SemanticError.
  void validate() const;
};

struct MotionEquation {
  std::string var;
  Expr rhs;
};

// q' = dH/dp, p' = -dH/dq + Gamma. With controls, the controlled momentum is
// replaced by its control and the control's rate is derived from the
// relation; the right-hand sides are then in (t, q, control).
std::vector<MotionEquation> equations_of_motion(const SystemModel& sys);

// The same without control elimination: rates of all states and momenta in
// terms of (t, q, p, controls).
std::vector<MotionEquation> raw_equations_of_motion(const SystemModel& sys);

// Time derivative of a control implied by its defining relation.
Expr control_rate(const SystemModel& sys, const Control& control);

// Replaces controlled momenta by their defining relations.
Expr eliminate_controls(const SystemModel& sys, const Expr& e);

// Total time derivative along solutions of the system.
Expr total_derivative_on_shell(const SystemModel& sys, const Expr& e);

}  // namespace phm
