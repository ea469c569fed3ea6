#pragma once

#include <string>

#include "phm/analysis.hpp"
#include "phm/hamsys.hpp"
#include "phm/model_io.hpp"
#include "phm/parse.hpp"

namespace phm::test {

inline SystemModel model(const std::string& name) { return load_model(std::string(PHM_MODEL_DIR) + "/" + name + ".phm"); }

inline Expr P(const SystemModel& sys, const std::string& text) {
  SymbolTable t = sys.symbol_table();
  return parse_expr(text, t);
}

inline bool zero(const SystemModel& sys, const Expr& e) { return is_zero(e, sys.sampling_domain()) == ZeroVerdict::Zero; }

}  // namespace phm::test
