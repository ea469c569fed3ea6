#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phm/analysis.hpp"
#include "phm/determine.hpp"
#include "phm/hamsys.hpp"

namespace phm {

struct ConservationReport {
  ZeroVerdict verdict = ZeroVerdict::Unknown;
  Expr residual;  // total derivative along solutions, constraints imposed
};

struct FirstIntegral {
  Expr I;  // controls eliminated
  SymmetryCandidate source;
  ConstraintSet validity;
  ConservationReport conservation;
};

// sum p_i eta^i - xi H - B. Throws ConservationFailed if the result is not
// conserved under `validity`.
FirstIntegral assemble_first_integral(const SystemModel& sys, const SymmetryCandidate& op,
                                      const ConstraintSet& validity = {}, std::uint64_t seed = 42);

ConservationReport check_conservation(const SystemModel& sys, const Expr& I, const ConstraintSet& constraints = {},
                                      std::uint64_t seed = 42);

// Solves I = level for `target`. I must be affine in a single power of the
// target; throws NotAffineInTarget otherwise.
Expr reduce_with_integral(const SystemModel& sys, const Expr& I, const std::string& level, const std::string& target);

struct DependenceReport {
  std::size_t rank = 0;
  std::vector<Expr> relations;  // in symbols I1, I2, ..., each = 0
  std::vector<bool> confirmed;  // symbolically, per relation
  bool relation_unknown = false;  // rank deficient without a degree-2 relation
  std::uint64_t seed = 42;
};

// Numeric Jacobian rank with respect to the phase variables and degree-2
// relations between the integrals. Parameters are fixed at one random draw.
DependenceReport dependence_rank(const SystemModel& sys, const std::vector<Expr>& integrals,
                                 const ConstraintSet& constraints = {}, std::size_t npoints = 20,
                                 std::uint64_t seed = 42);

}  // namespace phm
