#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "phm/expr.hpp"

namespace phm {

enum class ZeroVerdict { Zero, NonZero, Unknown };
const char* to_string(ZeroVerdict v);

// Where symbols are sampled when an expression cannot be decided exactly.
struct SamplingDomain {
  std::map<std::string, std::pair<double, double>> ranges;
  std::pair<double, double> fallback{0.1, 2.0};
  std::uint64_t seed = 42;
  int samples = 100;
  double tolerance = 1e-8;

  void declare_positive(const std::string& name) { ranges[name] = {0.1, 2.0}; }
  void declare_negative(const std::string& name) { ranges[name] = {-2.0, -0.1}; }
  std::pair<double, double> range(const std::string& name) const;
};

// Exact canonical test first, then random sampling. Sampled values are
// compared against 1e-8 relative to the magnitude of the individual terms,
// so large exponential weights do not cause false NonZero verdicts.
ZeroVerdict is_zero(const Expr& e, const SamplingDomain& domain = {});

// Exponent of each separation variable; absent means 0.
struct MonomialKey {
  std::map<std::string, Expr> exponents;

  Expr monomial() const;
  std::string str() const;
};

struct MonomialKeyLess {
  bool operator()(const MonomialKey& a, const MonomialKey& b) const;
};

using Collected = std::map<MonomialKey, Expr, MonomialKeyLess>;

// Groups the terms of `e` by powers of `vars`. Throws NonSeparable when a
// term depends on a separation variable other than through such a power.
Collected collect_by(const Expr& e, const std::vector<std::string>& vars);

}  // namespace phm
