#include "phm/report.hpp"

#include <sstream>

#include "phm/errors.hpp"

namespace phm {

Json to_json(const SymmetryCandidate& op) {
  Json eta = Json::object();
  for (const auto& [q, e] : op.eta) eta[q] = render(e);
  return {{"xi", render(op.xi)}, {"eta", eta}, {"B", render(op.B)}};
}

Json to_json(const ConstraintSet& cs) {
  Json j = Json::array();
  for (const auto& r : cs.relations()) j.push_back(render(r) + " = 0");
  for (const auto& p : cs.positive()) j.push_back(render(p) + " > 0");
  return j;
}

Json to_json(const Bindings& b) {
  Json j = Json::object();
  for (const auto& [k, v] : b) j[k] = render(v);
  return j;
}

Json to_json(const FirstIntegral& fi) {
  return {{"I", render(fi.I)},
          {"validity", to_json(fi.validity)},
          {"conservation", to_string(fi.conservation.verdict)},
          {"source", to_json(fi.source)}};
}

Json to_json(const DependenceReport& dep) {
  Json rels = Json::array();
  for (std::size_t i = 0; i < dep.relations.size(); ++i)
    rels.push_back({{"relation", render(dep.relations[i]) + " = 0"}, {"confirmed", bool(dep.confirmed[i])}});
  return {{"rank", dep.rank}, {"relations", rels}, {"relation_unknown", dep.relation_unknown}, {"seed", dep.seed}};
}

Json to_json(const VerifyReport& rep) {
  Json failures = Json::array();
  for (const auto& [m, r] : rep.failures) failures.push_back({{"monomial", m}, {"residual", r}});
  Json verdicts = Json::array();
  for (const auto& [m, v] : rep.verdicts) verdicts.push_back({{"monomial", m}, {"verdict", to_string(v)}});
  return {{"pass", rep.pass},
          {"substitutions", to_json(rep.substitutions)},
          {"unsolved_constraints", rep.unsolved_constraints},
          {"failures", failures},
          {"verdicts", verdicts}};
}

Json to_json(const DriftReport& d) {
  return {{"relative", d.relative}, {"absolute", d.absolute}, {"initial", d.initial}};
}

Json to_json(const TransversalityReport& t) {
  Json trace = Json::array();
  for (const auto& [x, v] : t.trace) trace.push_back({{"t", x}, {"value", v}});
  Json j{{"decaying", t.decaying}, {"trace", trace}};
  if (t.criterion) j["criterion"] = {{"value", *t.criterion}, {"holds", t.criterion_holds()}};
  return j;
}

Json to_json(const CaseReport& rep) {
  Json steps = Json::array();
  for (const auto& s : rep.steps)
    steps.push_back({{"name", s.name}, {"pass", s.pass}, {"detail", s.detail}, {"seconds", s.seconds}});
  return {{"case", rep.name}, {"seed", rep.seed}, {"steps", steps}, {"pass", rep.pass}, {"diffs", rep.diffs}};
}

Json solution_report(const SystemModel& sys, const SolutionSet& s, std::uint64_t seed) {
  Json branches = Json::array();
  for (const auto& b : s.branches) {
    Json ops = Json::array();
    for (const auto& o : b.operators) {
      Json op = to_json(o.op);
      op["rates"] = to_json(o.rates);
      op["trivial"] = o.trivial;
      op["verified"] = o.verified;
      if (!o.trivial && o.verified) {
        try {
          op["integral"] = render(substitute(assemble_first_integral(sys, o.op, b.constraints, seed).I, b.substitutions));
        } catch (const Error& e) {
          op["integral"] = nullptr;
          op["integral_error"] = e.what();
        }
      }
      ops.push_back(op);
    }
    branches.push_back({{"constraints", to_json(b.constraints)},
                        {"substitutions", to_json(b.substitutions)},
                        {"assumptions", b.assumptions},
                        {"operators", ops}});
  }
  Json rejected = Json::array();
  for (const auto& r : s.rejected) rejected.push_back({{"condition", r.condition}, {"reason", r.reason}});
  return {{"model", sys.name},     {"seed", seed},         {"unknowns", s.unknowns},
          {"equations", s.equations}, {"branches", branches}, {"rejected", rejected}};
}

std::string text_report(const Json& j, int indent) {
  std::ostringstream os;
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_structured() && !v.empty()) {
        os << pad << k << ":\n" << text_report(v, indent + 2);
      } else {
        os << pad << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (v.is_structured()) {
        os << pad << "-\n" << text_report(v, indent + 2);
      } else {
        os << pad << "- " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
      }
    }
  } else {
    os << pad << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
  return os.str();
}

}  // namespace phm
