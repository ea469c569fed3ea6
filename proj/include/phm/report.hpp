#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "phm/casebook.hpp"
#include "phm/determine.hpp"
#include "phm/integrals.hpp"
#include "phm/numerics.hpp"
#include "phm/solve.hpp"

namespace phm {

using Json = nlohmann::ordered_json;

Json to_json(const SymmetryCandidate& op);
Json to_json(const ConstraintSet& cs);
Json to_json(const Bindings& b);
Json to_json(const FirstIntegral& fi);
Json to_json(const DependenceReport& dep);
Json to_json(const VerifyReport& rep);
Json to_json(const DriftReport& d);
Json to_json(const TransversalityReport& t);
Json to_json(const CaseReport& rep);

// Every nontrivial verified operator carries its assembled first integral.
Json solution_report(const SystemModel& sys, const SolutionSet& s, std::uint64_t seed);

std::string text_report(const Json& j, int indent = 0);

}  // namespace phm
