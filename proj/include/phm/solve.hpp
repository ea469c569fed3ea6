#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "phm/determine.hpp"
#include "phm/hamsys.hpp"

namespace phm {

// Basis terms per unknown function (xi, eta or eta1.., B). Each term gets its
// own unknown coefficient. Unknown rates are symbols of kind Rate.
struct AnsatzTemplate {
  std::map<std::string, std::vector<Expr>> basis;

  AnsatzTemplate& with(const std::string& function, std::vector<Expr> terms);
  std::size_t size() const;
  std::vector<std::string> rate_symbols() const;
  // Throws SemanticError on duplicate terms or unknown function names.
  void validate(const SystemModel& sys) const;
};

Expr unknown_rate(const std::string& name = "lambda");

struct OperatorSolution {
  SymmetryCandidate op;
  Bindings rates;
  bool trivial = false;  // xi = eta = 0 and B constant
  bool verified = false;
};

struct SolutionBranch {
  ConstraintSet constraints;
  Bindings substitutions;  // parameter values implied by the constraints
  std::vector<std::string> assumptions;  // expressions assumed nonzero
  std::vector<OperatorSolution> operators;
};

struct RejectedBranch {
  std::string condition;
  std::string reason;
};

struct SolutionSet {
  std::vector<SolutionBranch> branches;  // unconstrained branch first
  std::vector<RejectedBranch> rejected;
  std::size_t unknowns = 0;
  std::size_t equations = 0;

  // Branch without parameter constraints; always present.
  const SolutionBranch& generic() const { return branches.front(); }
  // Nontrivial operators of the generic branch.
  std::vector<SymmetryCandidate> generic_operators() const;
  std::vector<const SolutionBranch*> constrained() const;
};

struct SolveOptions {
  int max_depth = 6;
  std::uint64_t seed = 42;
  bool verify = true;
};

SolutionSet solve_determining(const SystemModel& sys, const DeterminingSystem& det, const AnsatzTemplate& tmpl,
                              const SolveOptions& opts = {});
SolutionSet solve_determining(const SystemModel& sys, const AnsatzTemplate& tmpl, const SolveOptions& opts = {});

AnsatzTemplate default_template(const SystemModel& sys, int degree, bool with_logs, bool with_unknown_rates);

// Numeric rank of candidates as vectors of functions.
std::size_t candidate_rank(const SystemModel& sys, const std::vector<SymmetryCandidate>& cands, std::uint64_t seed = 42);

// Each list lies in the span of the other.
bool spans_equal(const SystemModel& sys, const std::vector<SymmetryCandidate>& a,
                 const std::vector<SymmetryCandidate>& b, std::uint64_t seed = 42);

}  // namespace phm
