#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phm/analysis.hpp"
#include "phm/hamsys.hpp"

namespace phm {

// Operator coefficients (xi, eta^i) and gauge term B, functions of t and the
// states only.
struct SymmetryCandidate {
  Expr xi;
  std::map<std::string, Expr> eta;  // by state
  Expr B;

  Expr eta_of(const std::string& q) const;
  SymmetryCandidate operator+(const SymmetryCandidate& o) const;
  SymmetryCandidate scaled(const Expr& c) const;
  SymmetryCandidate substituted(const Bindings& b) const;
  bool is_zero() const;
};

// xi(t, q...), eta^i(t, q...), B(t, q...) as undetermined functions.
SymmetryCandidate generic_candidate(const SystemModel& sys);
std::vector<std::string> unknown_function_names(const SystemModel& sys);

struct DeterminingSystem {
  std::string model;
  std::vector<std::string> unknown_functions;
  std::vector<std::pair<MonomialKey, Expr>> residuals;

  Expr reconstruct() const;
};

// sum p_i D(eta^i) - xi H_t - sum eta^i H_{q^i} - H D(xi) - D(B)
//   + sum (eta^i - xi H_{p_i}) Gamma^i, with D the total derivative for
// functions of (t, q) and controlled momenta eliminated afterwards.
Expr determining_expression(const SystemModel& sys, const SymmetryCandidate& cand);

DeterminingSystem separate(const SystemModel& sys, const Expr& det);

struct VerifyReport {
  bool pass = true;
  Bindings substitutions;  // parameter values implied by the constraints
  std::vector<std::string> unsolved_constraints;
  std::vector<std::pair<std::string, std::string>> failures;  // monomial, residual
  std::vector<std::pair<std::string, ZeroVerdict>> verdicts;
};

VerifyReport verify_candidate(const SystemModel& sys, const SymmetryCandidate& cand, const ConstraintSet& constraints,
                              std::uint64_t seed = 42);

}  // namespace phm
