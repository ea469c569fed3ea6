#include "phm/model_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "phm/errors.hpp"

namespace phm {

namespace {

struct Line {
  std::size_t number;
  std::string text;  // comment stripped
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

class LineCursor {
 public:
  explicit LineCursor(const Line& line) : line_(line) {}

  [[noreturn]] void fail(const std::string& msg, std::size_t col) const {
    throw ParseError(msg + " (line " + std::to_string(line_.number) + ", column " + std::to_string(col + 1) + ")",
                     col, line_.number, col + 1);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip() {
    while (pos_ < line_.text.size() && std::isspace(static_cast<unsigned char>(line_.text[pos_]))) ++pos_;
  }
  bool at_end() {
    skip();
    return pos_ >= line_.text.size();
  }
  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < line_.text.size()) {
      unsigned char c = static_cast<unsigned char>(line_.text[pos_]);
      if (!(std::isalnum(c) || c == '_' || c >= 0x80)) break;
      ++pos_;
    }
    if (start == pos_) fail("expected identifier");
    if (std::isdigit(static_cast<unsigned char>(line_.text[start]))) fail("expected identifier", start);
    return line_.text.substr(start, pos_ - start);
  }
  bool accept(const std::string& tok) {
    skip();
    if (line_.text.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!accept(tok)) fail("expected '" + tok + "'");
  }
  std::size_t pos() const { return pos_; }
  std::string rest() const { return line_.text.substr(pos_); }
  const Line& line() const { return line_; }

 private:
  const Line& line_;
  std::size_t pos_ = 0;
};

Rational parse_number_literal(LineCursor& cur) {
  cur.skip();
  std::size_t start = cur.pos();
  std::string text = trim(cur.rest());
  bool neg = false;
  std::string body = text;
  if (!body.empty() && body[0] == '-') {
    neg = true;
    body = trim(body.substr(1));
  }
  try {
    Rational v;
    auto slash = body.find('/');
    if (slash != std::string::npos) {
      v = parse_decimal(trim(body.substr(0, slash))) / parse_decimal(trim(body.substr(slash + 1)));
    } else {
      v = parse_decimal(body);
    }
    return neg ? Rational(-v) : v;
  } catch (const Error&) {
    cur.fail("malformed number '" + text + "'", start);
  }
}

Expr parse_at(const LineCursor& cur, const std::string& text, std::size_t offset, const SymbolTable& table) {
  try {
    return parse_expr(text, table);
  } catch (const ParseError& e) {
    cur.fail(e.what(), offset + e.offset);
  }
}

}  // namespace

std::string render_number(const Rational& q) {
  mpz_class den = q.get_den();
  int twos = 0, fives = 0;
  while (den % 2 == 0) {
    den /= 2;
    ++twos;
  }
  while (den % 5 == 0) {
    den /= 5;
    ++fives;
  }
  if (den != 1) return q.get_str();
  int digits = std::max(twos, fives);
  if (digits == 0) return q.get_str();
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  mpz_class scaled = q.get_num() * scale / q.get_den();
  bool neg = scaled < 0;
  std::string s = mpz_class(abs(scaled)).get_str();
  if (static_cast<int>(s.size()) <= digits) s = std::string(static_cast<std::size_t>(digits) - s.size() + 1, '0') + s;
  s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  return (neg ? "-" : "") + s;
}

SystemModel parse_model(const std::string& text, const std::string& source) {
  std::vector<Line> lines;
  {
    std::istringstream in(text);
    std::string raw;
    std::size_t n = 0;
    while (std::getline(in, raw)) {
      ++n;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      if (trim(raw).empty()) continue;
      lines.push_back({n, raw});
    }
  }
  if (lines.empty()) throw ParseError(source + ": empty model", 0, 1, 1);

  SystemModel sys;
  // Pass 1: header and declarations.
  {
    LineCursor cur(lines.front());
    if (!cur.accept("model")) cur.fail("model file must start with 'model NAME'");
    sys.name = cur.ident();
    if (!cur.at_end()) cur.fail("unexpected text after model name");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    LineCursor cur(lines[i]);
    std::string kw = cur.ident();
    if (kw == "param") {
      ParamDecl p;
      p.name = cur.ident();
      if (cur.accept(">")) {
        cur.expect("0");
        p.sign = 1;
      } else if (cur.accept("<")) {
        cur.expect("0");
        p.sign = -1;
      }
      if (cur.accept("=")) p.value = parse_number_literal(cur);
      else if (!cur.at_end()) cur.fail("unexpected text in param declaration");
      sys.params.push_back(p);
    } else if (kw == "pair") {
      cur.expect("(");
      CanonicalPair pr;
      pr.q = cur.ident();
      cur.expect(",");
      pr.p = cur.ident();
      cur.expect(")");
      if (!cur.at_end()) cur.fail("unexpected text after pair");
      sys.pairs.push_back(pr);
    } else if (kw == "control") {
      Control c;
      c.name = cur.ident();
      if (cur.ident() != "with") cur.fail("expected 'with'");
      c.momentum = cur.ident();
      sys.controls.push_back(c);
    } else if (kw != "H" && kw != "Gamma" && kw != "separate_by" && kw != "assume") {
      cur.fail("unknown statement '" + kw + "'", 0);
    }
  }

  // Pass 2: expressions.
  SymbolTable table = sys.symbol_table();
  std::size_t control_index = 0;
  bool have_h = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    LineCursor cur(lines[i]);
    std::string kw = cur.ident();
    if (kw == "H") {
      cur.expect("=");
      if (have_h) cur.fail("H defined twice", 0);
      sys.H = parse_at(cur, cur.rest(), cur.pos(), table);
      have_h = true;
    } else if (kw == "Gamma") {
      cur.expect("[");
      std::string p = cur.ident();
      cur.expect("]");
      cur.expect("=");
      if (sys.gamma.count(p)) cur.fail("Gamma[" + p + "] defined twice", 0);
      sys.gamma[p] = parse_at(cur, cur.rest(), cur.pos(), table);
    } else if (kw == "control") {
      Control& c = sys.controls[control_index++];
      cur.ident();
      cur.ident();
      cur.ident();
      cur.expect("=");
      c.relation = parse_at(cur, cur.rest(), cur.pos(), table);
    } else if (kw == "separate_by") {
      do {
        sys.separation_vars.push_back(cur.ident());
      } while (cur.accept(","));
      if (!cur.at_end()) cur.fail("unexpected text in separate_by");
    } else if (kw == "assume") {
      std::string rest = cur.rest();
      auto eq = rest.rfind('=');
      if (eq == std::string::npos || trim(rest.substr(eq + 1)) != "0") cur.fail("expected 'assume EXPR = 0'");
      sys.constraints.add(parse_at(cur, rest.substr(0, eq), cur.pos(), table));
    }
  }
  if (!have_h) throw ParseError(source + ": model has no H", 0, lines.back().number, 1);
  if (sys.separation_vars.empty()) {
    for (const auto& pr : sys.pairs) {
      const Control* c = sys.control_for(pr.p);
      sys.separation_vars.push_back(c ? c->name : pr.p);
    }
  }
  try {
    sys.validate();
  } catch (const SemanticError& e) {
    throw SemanticError(source + ": " + e.what());
  }
  return sys;
}

SystemModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str(), path);
}

AnsatzTemplate parse_ansatz(const std::string& text, const SystemModel& sys, const std::string& source) {
  SymbolTable table = sys.symbol_table();
  table.declare("lambda", SymbolKind::Rate);
  for (int i = 1; i <= 9; ++i) table.declare("lambda" + std::to_string(i), SymbolKind::Rate);
  AnsatzTemplate tmpl;
  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    Line line{n, raw};
    LineCursor cur(line);
    std::string name = cur.ident();
    if (tmpl.basis.count(name)) cur.fail("duplicate function '" + name + "'");
    cur.expect("=");
    std::vector<Expr> terms;
    std::size_t start = cur.pos();
    int depth = 0;
    for (std::size_t i = start; i <= raw.size(); ++i) {
      char c = i < raw.size() ? raw[i] : ',';
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) {
        std::string piece = raw.substr(start, i - start);
        if (trim(piece).empty()) cur.fail("empty term", start);
        terms.push_back(parse_at(cur, piece, start, table));
        start = i + 1;
      }
    }
    tmpl.with(name, terms);
  }
  if (tmpl.basis.empty()) throw ParseError(source + ": empty ansatz", 0, 1, 1);
  try {
    tmpl.validate(sys);
  } catch (const SemanticError& e) {
    throw SemanticError(source + ": " + e.what());
  }
  return tmpl;
}

AnsatzTemplate load_ansatz(const std::string& path, const SystemModel& sys) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open ansatz file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ansatz(ss.str(), sys, path);
}

std::string render_model(const SystemModel& sys) {
  std::ostringstream out;
  out << "model " << sys.name << "\n";
  for (const auto& p : sys.params) {
    out << "param " << p.name;
    if (p.sign > 0) out << " > 0";
    if (p.sign < 0) out << " < 0";
    if (p.value) out << " = " << render_number(*p.value);
    out << "\n";
  }
  for (const auto& pr : sys.pairs) out << "pair (" << pr.q << ", " << pr.p << ")\n";
  for (const auto& c : sys.controls) out << "control " << c.name << " with " << c.momentum << " = " << render(c.relation) << "\n";
  out << "H = " << render(sys.H) << "\n";
  for (const auto& [p, g] : sys.gamma) out << "Gamma[" << p << "] = " << render(g) << "\n";
  if (!sys.separation_vars.empty()) {
    out << "separate_by ";
    for (std::size_t i = 0; i < sys.separation_vars.size(); ++i) out << (i ? ", " : "") << sys.separation_vars[i];
    out << "\n";
  }
  for (const auto& r : sys.constraints.relations()) out << "assume " << render(r) << " = 0\n";
  return out.str();
}

bool same_model(const SystemModel& a, const SystemModel& b) {
  if (a.name != b.name || a.params.size() != b.params.size() || a.pairs.size() != b.pairs.size()) return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params[i];
    const auto& y = b.params[i];
    if (x.name != y.name || x.sign != y.sign || x.value != y.value) return false;
  }
  for (std::size_t i = 0; i < a.pairs.size(); ++i)
    if (a.pairs[i].q != b.pairs[i].q || a.pairs[i].p != b.pairs[i].p) return false;
  if (a.H != b.H) return false;
  if (a.gamma.size() != b.gamma.size()) return false;
  for (const auto& [k, v] : a.gamma) {
    auto it = b.gamma.find(k);
    if (it == b.gamma.end() || it->second != v) return false;
  }
  if (a.controls.size() != b.controls.size()) return false;
  for (std::size_t i = 0; i < a.controls.size(); ++i) {
    const auto& x = a.controls[i];
    const auto& y = b.controls[i];
    if (x.name != y.name || x.momentum != y.momentum || x.relation != y.relation) return false;
  }
  if (a.separation_vars != b.separation_vars) return false;
  const auto& ra = a.constraints.relations();
  const auto& rb = b.constraints.relations();
  if (ra.size() != rb.size()) return false;
  for (std::size_t i = 0; i < ra.size(); ++i)
    if (ra[i] != rb[i]) return false;
  return true;
}

}  // namespace phm
