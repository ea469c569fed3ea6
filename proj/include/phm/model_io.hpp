#pragma once

#include <string>

#include "phm/hamsys.hpp"
#include "phm/solve.hpp"

namespace phm {

// Model DSL, one statement per line, '#' starts a comment:
//   model NAME
//   param NAME [> 0 | < 0] [= NUMBER]
//   pair (Q, P)
//   control C with P = EXPR
//   H = EXPR
//   Gamma[P] = EXPR
//   separate_by V, ...
//   assume EXPR = 0
SystemModel parse_model(const std::string& text, const std::string& source = "<string>");
SystemModel load_model(const std::string& path);
std::string render_model(const SystemModel& sys);

// Ansatz file, one function per line: NAME = TERM, TERM, ...
// NAME is xi, eta (eta1, eta2, ... for several pairs) or B; lambda and
// lambda1 .. lambda9 denote unknown rates.
AnsatzTemplate parse_ansatz(const std::string& text, const SystemModel& sys, const std::string& source = "<string>");
AnsatzTemplate load_ansatz(const std::string& path, const SystemModel& sys);

// Canonical equality of two models (same declarations, equal expressions).
bool same_model(const SystemModel& a, const SystemModel& b);

// Exact literal for a rational: a terminating decimal when possible.
std::string render_number(const Rational& q);

}  // namespace phm
