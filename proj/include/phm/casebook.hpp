#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phm/determine.hpp"
#include "phm/hamsys.hpp"
#include "phm/numerics.hpp"
#include "phm/solve.hpp"

namespace phm {

struct NumericScenario {
  ParamValues params;
  ParamValues ic;
  double t0 = 0;
  double t1 = 10;
  double h = 1e-4;
  Precision precision = Precision::Double;
  double drift_tol = 1e-6;
};

// Parameters violating the expected constraints; every integral must drift.
struct Witness {
  std::string label;
  ParamValues params;
  double min_drift = 1e-3;
};

struct ClosedForm {
  Bindings solution;  // expressions of t
  ParamValues params;  // model parameters plus integration constants
  double t0 = 0;
  double t1 = 5;
  std::size_t samples = 50;
  double tol = 1e-10;
};

struct GrowthChecks {
  Expr rate;  // common growth rate of s and c
  double rate_tol = 1e-8;
  Expr transversality;  // quantity that must vanish as t grows
  double t_max = 400;
  ParamValues violating;  // parameters breaking the analytic criterion
  Bindings violating_path;
  double violating_t_max = 40;
};

struct CaseExpectation {
  std::string name;
  SystemModel model;
  AnsatzTemplate tmpl;
  ConstraintSet constraints;
  bool exact_constraints = false;  // no other branch unless it pins a parameter to zero
  std::vector<Expr> rates;
  std::vector<SymmetryCandidate> operators;
  std::vector<Expr> integrals;  // integrals[k] comes from operators[k]
  std::optional<std::size_t> rank;
  std::vector<Expr> dependence;  // relations in I1, I2, ...
  std::optional<ClosedForm> closed_form;
  NumericScenario scenario;
  std::vector<Witness> witnesses;
  std::optional<GrowthChecks> growth;
};

struct CaseStep {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

struct CaseReport {
  std::string name;
  std::uint64_t seed = 42;
  std::vector<CaseStep> steps;
  std::vector<std::string> diffs;
  bool pass = false;

  const CaseStep* step(const std::string& name) const;
};

// growth_env, mechanical, duffing_vdp, lotka_volterra.
std::vector<SystemModel> builtin_models();
// Also knows the harmonic oscillator.
SystemModel builtin_model(const std::string& name);
std::string builtin_model_text(const std::string& name);

// The four reference cases; the harmonic sanity case runs by name only.
std::vector<std::string> case_names();
CaseExpectation case_expectation(const std::string& name);

CaseReport run_case(const CaseExpectation& expectation, std::uint64_t seed = 42);
CaseReport run_case(const std::string& name, std::uint64_t seed = 42);

// Relation in symbols I1, I2, ...
Expr dependence_relation(const std::string& text, std::size_t count);

// a = k b for a nonzero k free of t and the phase variables.
bool equal_up_to_factor(const SystemModel& sys, const Expr& a, const Expr& b, std::uint64_t seed = 42);

}  // namespace phm
