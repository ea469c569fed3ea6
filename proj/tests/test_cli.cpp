#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "support.hpp"

#include <json.hpp>

#include "phm/casebook.hpp"
#include "phm/errors.hpp"
#include "phm/model_io.hpp"
#include "phm/report.hpp"

using namespace phm;
using phm::test::model;
using phm::test::P;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string models(const std::string& name) { return std::string(PHM_MODEL_DIR) + "/" + name + ".phm"; }

fs::path temp_file(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / ("phm_test_" + name);
  std::ofstream(p) << content;
  return p;
}

bool same_relation(const Expr& a, const Expr& b) { return normalize_relation(a) == normalize_relation(b); }

}  // namespace

TEST_CASE("derive reports the Duffing constraint") {
  auto r = run({"derive", models("duffing_vdp"), "--unknown-rates"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["seed"] == 42);
  auto sys = model("duffing_vdp");
  Expr want = P(sys, "beta^2*gamma + 3*alpha*beta - 9");
  bool found = false;
  for (const auto& b : j["branches"]) {
    if (b["constraints"].size() != 1) continue;
    std::string c = b["constraints"][0];
    c = c.substr(0, c.find(" = 0"));
    if (!same_relation(P(sys, c), want)) continue;
    found = true;
    std::vector<std::string> rates;
    for (const auto& o : b["operators"]) rates.push_back(o["rates"]["lambda"]);
    CHECK(rates.size() == 2);
    for (const auto& x : rates) CHECK((P(sys, x) == P(sys, "6/beta") || P(sys, x) == P(sys, "3/beta")));
    for (const auto& o : b["operators"]) CHECK(o.contains("integral"));
  }
  CHECK(found);
}

TEST_CASE("seed is echoed") {
  auto r = run({"derive", "harmonic", "--seed", "7"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["seed"] == 7);
  auto c = run({"casebook", "harmonic", "--seed", "9"});
  REQUIRE(c.code == 0);
  auto j = nlohmann::json::parse(c.out);
  CHECK(j["seed"] == 9);
  CHECK(j["cases"][0]["seed"] == 9);
}

TEST_CASE("simulate writes CSV and a drift summary") {
  auto r = run({"simulate", models("mechanical"), "--ic", "q1=1,q2=1,p1=0,p2=1", "--t1", "10", "--dt", "0.001",
                "--watch", "I4"});
  REQUIRE(r.code == 0);
  std::istringstream csv(r.out);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,q1,q2,p1,p2");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == 10001);
  auto s = nlohmann::json::parse(r.err);
  CHECK(s["seed"] == 42);
  CHECK(s["drift"][0]["watch"] == "I4");
  CHECK(s["drift"][0]["relative"].get<double>() < 1e-8);
}

TEST_CASE("simulate watches expressions and enforces a tolerance") {
  fs::path out = fs::temp_directory_path() / "phm_test_lv.csv";
  auto r = run({"simulate", "lotka_volterra", "--ic", "q=1,p=1", "--t1", "2", "--dt", "0.01", "--watch",
                "p*q", "--tol", "1e-12", "--out", out.string()});
  CHECK(r.code == 1);
  CHECK(fs::exists(out));
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["drift"][0]["pass"] == false);
  auto g = run({"simulate", "lotka_volterra", "--ic", "q=1,p=1", "--set", "m=-1", "--t1", "2", "--dt", "0.001",
                "--watch", "I2", "--tol", "1e-8", "--precision", "long", "--out", out.string()});
  CHECK(g.code == 0);
  fs::remove(out);
}

TEST_CASE("verify") {
  auto r = run({"verify", "lotka_volterra"});
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["pass"] == true);

  // Second Lotka-Volterra operator without m = -a.
  auto bad = temp_file("lv_bad.op", "xi = 0\neta = -exp(-a*t)/a\nB = n*q*exp(-a*t)/(a*b)\n");
  auto f = run({"verify", "lotka_volterra", "--candidate", bad.string()});
  CHECK(f.code == 1);
  CHECK(nlohmann::json::parse(f.out)["pass"] == false);

  auto good = temp_file("lv_good.op", "xi = 0\neta = -exp(-a*t)/a\nB = n*q*exp(-a*t)/(a*b)\nassume m + a = 0\n");
  auto g = run({"verify", "lotka_volterra", "--candidate", good.string()});
  CHECK(g.code == 0);
  auto j = nlohmann::json::parse(g.out);
  CHECK(j["candidates"][0]["integral"]["conservation"] == "Zero");
  fs::remove(bad);
  fs::remove(good);
}

TEST_CASE("integrals") {
  auto r = run({"integrals", "mechanical"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  REQUIRE(j["branches"].size() == 1);
  CHECK(j["branches"][0]["integrals"].size() == 5);
  CHECK(j["branches"][0]["dependence"]["rank"] == 4);
}

TEST_CASE("ansatz file and text format") {
  auto a = temp_file("harmonic.ans", "# time translation only\nxi = 1\nB = 1\n");
  auto r = run({"derive", "harmonic", "--ansatz", a.string(), "--format", "text"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("model: harmonic") != std::string::npos);
  CHECK(r.out.find("xi: 1") != std::string::npos);
  fs::remove(a);
}

TEST_CASE("usage and parse errors exit with 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"bogus"}).code == 2);
  CHECK(run({"derive"}).code == 2);
  CHECK(run({"derive", "no_such_model"}).code == 2);
  CHECK(run({"derive", "harmonic", "--format", "xml"}).code == 2);
  CHECK(run({"derive", "harmonic", "--degree", "9"}).code == 2);
  CHECK(run({"simulate", "harmonic", "--ic", "q=1,p"}).code == 2);
  CHECK(run({"simulate", "mechanical", "--watch", "I9"}).code == 2);
  auto broken = temp_file("broken.phm", "model broken\npair (q, p)\nH = p^2 +\n");
  auto r = run({"derive", broken.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
  auto ans = temp_file("broken.ans", "xi = 1\nzeta = q\n");
  CHECK(run({"derive", "harmonic", "--ansatz", ans.string()}).code == 2);
  fs::remove(broken);
  fs::remove(ans);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("ansatz parsing") {
  auto sys = model("duffing_vdp");
  auto t = parse_ansatz("xi = exp(lambda*t)\neta = exp(lambda*t)*q, exp(lambda*t)*q^3\nB = 1, q^2\n", sys);
  CHECK(t.basis.at("eta").size() == 2);
  CHECK(t.rate_symbols() == std::vector<std::string>{"lambda"});
  CHECK_THROWS_AS(parse_ansatz("xi = 1, 1\n", sys), SemanticError);
  CHECK_THROWS_AS(parse_ansatz("xi = 1 +\n", sys), ParseError);
  auto mech = model("mechanical");
  auto m = parse_ansatz("xi = 1\neta1 = 1, t\neta2 = sin(t)\nB = q2^2\n", mech);
  CHECK(m.size() == 5);
  CHECK_THROWS_AS(parse_ansatz("eta = 1\n", mech), SemanticError);
}

TEST_CASE("reports") {
  auto sys = model("lotka_volterra");
  CaseExpectation ex = case_expectation("lotka_volterra");
  Json op = to_json(ex.operators[1]);
  CHECK(op["xi"] == "0");
  CHECK(op.contains("eta"));
  CHECK(to_json(ex.constraints)[0] == "a + m = 0");
  DriftReport d{1e-9, 2e-9, 3};
  CHECK(to_json(d)["absolute"] == 2e-9);
  std::string text = text_report(Json{{"a", 1}, {"b", Json::array({"x", "y"})}, {"c", Json::object()}});
  CHECK(text == "a: 1\nb:\n  - x\n  - y\nc: {}\n");
}
