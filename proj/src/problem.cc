#include "reachsynth/problem.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "reachsynth/grid.h"

namespace reachsynth {

ControllerTemplate::ControllerTemplate(int n_vars, int n_outputs, int degree)
    : n_vars_(n_vars), n_outputs_(n_outputs), degree_(degree),
      basis_(MonomialBasis(n_vars, degree)) {
  if (n_outputs < 1) throw std::invalid_argument("template needs >= 1 output");
}

std::vector<Polynomial> ControllerTemplate::Instantiate(
    const std::vector<double>& coeffs) const {
  if (static_cast<int>(coeffs.size()) != num_coefficients()) {
    throw std::invalid_argument("Instantiate: expected " +
                                std::to_string(num_coefficients()) +
                                " coefficients, got " +
                                std::to_string(coeffs.size()));
  }
  std::vector<Polynomial> u;
  for (int j = 0; j < n_outputs_; ++j) {
    Polynomial p(n_vars_);
    for (int b = 0; b < basis_size(); ++b) {
      p.AddTerm(basis_[b], coeffs[index(j, b)]);
    }
    u.push_back(std::move(p));
  }
  return u;
}

std::vector<double> ControllerTemplate::CoefficientsOf(
    const std::vector<Polynomial>& u) const {
  if (static_cast<int>(u.size()) != n_outputs_) {
    throw std::invalid_argument("CoefficientsOf: output count mismatch");
  }
  std::vector<double> c(num_coefficients(), 0.0);
  for (int j = 0; j < n_outputs_; ++j) {
    for (const auto& [m, v] : u[j].terms()) {
      auto it = std::find(basis_.begin(), basis_.end(), m);
      if (it == basis_.end()) {
        throw std::invalid_argument("CoefficientsOf: term outside template");
      }
      c[index(j, static_cast<int>(it - basis_.begin()))] = v;
    }
  }
  return c;
}

namespace {

class PolyParser {
 public:
  PolyParser(const std::string& text, const std::vector<std::string>& names)
      : text_(text), names_(names) {}

  Polynomial Parse() {
    Polynomial p = Expr();
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected character '" +
                                   std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  int n() const { return static_cast<int>(names_.size()); }

  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError("polynomial syntax error at byte " +
                         std::to_string(pos_) + ": " + msg + " in \"" + text_ +
                         "\"",
                     static_cast<int>(pos_));
  }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool Accept(char c) {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // A leading sign is accepted as an extension so that "-x + 0.3" parses.
  Polynomial Expr() {
    SkipSpace();
    bool negate = false;
    if (Accept('-')) {
      negate = true;
    } else {
      Accept('+');
    }
    Polynomial acc = Term();
    if (negate) acc = -acc;
    while (true) {
      if (Accept('+')) {
        acc += Term();
      } else if (Accept('-')) {
        acc -= Term();
      } else {
        return acc;
      }
    }
  }

  Polynomial Term() {
    Polynomial acc = Factor();
    while (Accept('*')) acc = acc * Factor();
    return acc;
  }

  Polynomial Factor() {
    Polynomial base = Base();
    if (Accept('^')) {
      SkipSpace();
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      if (start == pos_) Fail("malformed exponent (expected unsigned integer)");
      const long e = std::strtol(text_.substr(start, pos_ - start).c_str(),
                                 nullptr, 10);
      if (e > 64) Fail("exponent too large");
      Polynomial r = Polynomial::Constant(n(), 1.0);
      for (long k = 0; k < e; ++k) r = r * base;
      return r;
    }
    return base;
  }

  bool TryRational(double* value) {
    const std::size_t save = pos_;
    auto digits = [&](std::string* out) {
      SkipSpace();
      const std::size_t s = pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
      *out = text_.substr(s, pos_ - s);
      return !out->empty();
    };
    bool neg = Accept('-');
    std::string num, den;
    if (digits(&num) && Accept('/') && digits(&den) && Accept(')')) {
      const double d = std::strtod(den.c_str(), nullptr);
      if (d == 0.0) Fail("zero denominator");
      *value = (neg ? -1.0 : 1.0) * std::strtod(num.c_str(), nullptr) / d;
      return true;
    }
    pos_ = save;
    return false;
  }

  Polynomial Base() {
    SkipSpace();
    if (pos_ >= text_.size()) Fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      double r;
      if (TryRational(&r)) return Polynomial::Constant(n(), r);
      Polynomial inner = Expr();
      if (!Accept(')')) Fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) Fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return Polynomial::Constant(n(), v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_')) {
        ++pos_;
      }
      const std::string ident = text_.substr(start, pos_ - start);
      auto it = std::find(names_.begin(), names_.end(), ident);
      if (it == names_.end()) {
        pos_ = start;
        Fail("unknown variable '" + ident + "'");
      }
      return Polynomial::Variable(n(), static_cast<int>(it - names_.begin()));
    }
    Fail("unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& text_;
  const std::vector<std::string>& names_;
  std::size_t pos_ = 0;
};

// --- problem file ---------------------------------------------------------

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string StripComment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] void FileError(const std::string& section, const std::string& key,
                            int line, const std::string& msg) {
  std::string where = "[" + section + "]";
  if (!key.empty()) where += " " + key;
  throw ParseError("problem file line " + std::to_string(line) + ", " + where +
                       ": " + msg,
                   -1, line);
}

// Tokens of a list value: quoted strings and the separators , ; [ ].
struct ListToken {
  enum Kind { kString, kComma, kSemicolon, kOpen, kClose } kind;
  std::string text;
};

std::vector<ListToken> TokenizeList(const std::string& value,
                                    const std::string& section,
                                    const std::string& key, int line) {
  std::vector<ListToken> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    switch (c) {
      case ',': out.push_back({ListToken::kComma, ""}); break;
      case ';': out.push_back({ListToken::kSemicolon, ""}); break;
      case '[': out.push_back({ListToken::kOpen, ""}); break;
      case ']': out.push_back({ListToken::kClose, ""}); break;
      case '"': {
        const auto close = value.find('"', i + 1);
        if (close == std::string::npos) {
          FileError(section, key, line, "unterminated string");
        }
        out.push_back({ListToken::kString, value.substr(i + 1, close - i - 1)});
        i = close;
        break;
      }
      default:
        FileError(section, key, line,
                  std::string("unexpected character '") + c + "'");
    }
  }
  return out;
}

std::vector<std::string> ParseStringList(const std::string& value,
                                         const std::string& section,
                                         const std::string& key, int line) {
  const auto toks = TokenizeList(value, section, key, line);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i % 2 == 0) {
      if (toks[i].kind != ListToken::kString) {
        FileError(section, key, line, "expected quoted polynomial");
      }
      out.push_back(toks[i].text);
    } else if (toks[i].kind != ListToken::kComma) {
      FileError(section, key, line, "expected ','");
    }
  }
  if (!toks.empty() && toks.back().kind != ListToken::kString) {
    FileError(section, key, line, "trailing separator");
  }
  return out;
}

std::vector<std::vector<std::string>> ParseMatrix(const std::string& value,
                                                  const std::string& section,
                                                  const std::string& key,
                                                  int line) {
  const auto toks = TokenizeList(value, section, key, line);
  if (toks.size() < 2 || toks.front().kind != ListToken::kOpen ||
      toks.back().kind != ListToken::kClose) {
    FileError(section, key, line, "matrix must be enclosed in [ ]");
  }
  std::vector<std::vector<std::string>> rows(1);
  bool expect_value = true;
  for (std::size_t i = 1; i + 1 < toks.size(); ++i) {
    const auto& t = toks[i];
    if (expect_value) {
      if (t.kind != ListToken::kString) {
        FileError(section, key, line, "expected quoted polynomial");
      }
      rows.back().push_back(t.text);
      expect_value = false;
    } else if (t.kind == ListToken::kComma) {
      expect_value = true;
    } else if (t.kind == ListToken::kSemicolon) {
      rows.emplace_back();
      expect_value = true;
    } else {
      FileError(section, key, line, "unexpected token in matrix");
    }
  }
  if (expect_value) FileError(section, key, line, "empty matrix entry");
  for (const auto& r : rows) {
    if (r.size() != rows.front().size()) {
      FileError(section, key, line, "ragged matrix rows");
    }
  }
  return rows;
}

std::vector<std::string> SplitWords(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

double ParseNumber(const std::string& s, const std::string& section,
                   const std::string& key, int line) {
  const std::string t = Trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) {
    FileError(section, key, line, "malformed number '" + t + "'");
  }
  return v;
}

Interval ParseInterval(const std::string& s, const std::string& section,
                       const std::string& key, int line) {
  const std::string t = Trim(s);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    FileError(section, key, line, "interval must look like [lo, hi]");
  }
  const std::string inner = t.substr(1, t.size() - 2);
  const auto comma = inner.find(',');
  if (comma == std::string::npos) {
    FileError(section, key, line, "interval must look like [lo, hi]");
  }
  Interval iv{ParseNumber(inner.substr(0, comma), section, key, line),
              ParseNumber(inner.substr(comma + 1), section, key, line)};
  if (!(iv.lo <= iv.hi)) FileError(section, key, line, "interval lo > hi");
  return iv;
}

Polynomial ParseIn(const std::string& text,
                   const std::vector<std::string>& names,
                   const std::string& section, const std::string& key,
                   int line) {
  try {
    return ParsePolynomial(text, names);
  } catch (const ParseError& e) {
    FileError(section, key, line, e.what());
  }
}

const Entry* Find(const std::map<std::string, Section>& sections,
                  const std::string& section, const std::string& key) {
  auto s = sections.find(section);
  if (s == sections.end()) return nullptr;
  auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

const Entry& Require(const std::map<std::string, Section>& sections,
                     const std::string& section, const std::string& key) {
  const Entry* e = Find(sections, section, key);
  if (!e) FileError(section, key, 0, "missing required key");
  return *e;
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

Polynomial ParsePolynomial(const std::string& text,
                           const std::vector<std::string>& variable_names) {
  if (variable_names.empty()) {
    throw std::invalid_argument("ParsePolynomial: no variables declared");
  }
  return PolyParser(text, variable_names).Parse();
}

ReachAvoidProblem ParseProblem(const std::string& text) {
  static const std::map<std::string, std::vector<std::string>> kKnownKeys = {
      {"system", {"vars", "inputs", "f", "g", "sigma"}},
      {"sets", {"safe_h", "target_hr", "bounding_box"}},
      {"inputs", {}},
      {"nominal", {"k"}},
      {"template", {"degree"}},
  };

  std::map<std::string, Section> sections;
  std::string current;
  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = Trim(StripComment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') FileError(line, "", line_no, "bad section header");
      current = Trim(line.substr(1, line.size() - 2));
      if (!kKnownKeys.count(current)) {
        FileError(current, "", line_no, "unknown section");
      }
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      FileError(current, "", line_no, "expected key = value");
    }
    if (current.empty()) FileError("", "", line_no, "key outside any section");
    const std::string key = Trim(line.substr(0, eq));
    const auto& allowed = kKnownKeys.at(current);
    if (current != "inputs" &&
        std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      FileError(current, key, line_no, "unknown key");
    }
    if (sections[current].count(key)) {
      FileError(current, key, line_no, "duplicate key");
    }
    sections[current][key] = Entry{Trim(line.substr(eq + 1)), line_no};
  }

  ReachAvoidProblem p;
  const Entry& vars = Require(sections, "system", "vars");
  p.state_names = SplitWords(vars.value);
  if (p.state_names.empty()) {
    FileError("system", "vars", vars.line, "no state variables");
  }
  const Entry& inputs = Require(sections, "system", "inputs");
  p.input_names = SplitWords(inputs.value);
  if (p.input_names.empty()) {
    FileError("system", "inputs", inputs.line, "no inputs declared");
  }
  const int n = static_cast<int>(p.state_names.size());
  const int m = static_cast<int>(p.input_names.size());
  p.system.n = n;
  p.system.m = m;
  const auto& names = p.state_names;

  const Entry& f = Require(sections, "system", "f");
  for (const auto& s : ParseStringList(f.value, "system", "f", f.line)) {
    p.system.f.push_back(ParseIn(s, names, "system", "f", f.line));
  }
  if (static_cast<int>(p.system.f.size()) != n) {
    FileError("system", "f", f.line,
              "expected " + std::to_string(n) + " entries, got " +
                  std::to_string(p.system.f.size()));
  }

  const Entry& g = Require(sections, "system", "g");
  const auto g_rows = ParseMatrix(g.value, "system", "g", g.line);
  if (static_cast<int>(g_rows.size()) != n ||
      static_cast<int>(g_rows.front().size()) != m) {
    FileError("system", "g", g.line,
              "expected shape " + std::to_string(n) + "x" + std::to_string(m) +
                  ", got " + std::to_string(g_rows.size()) + "x" +
                  std::to_string(g_rows.front().size()));
  }
  for (const auto& row : g_rows) {
    std::vector<Polynomial> prow;
    for (const auto& s : row) prow.push_back(ParseIn(s, names, "system", "g", g.line));
    p.system.g.push_back(std::move(prow));
  }

  if (const Entry* sigma = Find(sections, "system", "sigma")) {
    const auto rows = ParseMatrix(sigma->value, "system", "sigma", sigma->line);
    if (static_cast<int>(rows.size()) != n) {
      FileError("system", "sigma", sigma->line,
                "expected " + std::to_string(n) + " rows");
    }
    std::vector<std::vector<Polynomial>> s;
    for (const auto& row : rows) {
      std::vector<Polynomial> prow;
      for (const auto& t : row) {
        prow.push_back(ParseIn(t, names, "system", "sigma", sigma->line));
      }
      s.push_back(std::move(prow));
    }
    p.system.sigma = std::move(s);
  }

  const Entry& h = Require(sections, "sets", "safe_h");
  const auto hs = ParseStringList(h.value, "sets", "safe_h", h.line);
  if (hs.size() != 1) FileError("sets", "safe_h", h.line, "expected one polynomial");
  p.h = ParseIn(hs[0], names, "sets", "safe_h", h.line);
  const Entry& hr = Require(sections, "sets", "target_hr");
  const auto hrs = ParseStringList(hr.value, "sets", "target_hr", hr.line);
  if (hrs.size() != 1) {
    FileError("sets", "target_hr", hr.line, "expected one polynomial");
  }
  p.h_r = ParseIn(hrs[0], names, "sets", "target_hr", hr.line);

  p.bounding_box.assign(n, Interval{});
  if (const Entry* bb = Find(sections, "sets", "bounding_box")) {
    std::vector<Interval> box;
    std::string rest = bb->value;
    std::size_t pos = 0;
    while (pos < rest.size()) {
      const auto open = rest.find('[', pos);
      if (open == std::string::npos) break;
      const auto close = rest.find(']', open);
      if (close == std::string::npos) {
        FileError("sets", "bounding_box", bb->line, "unterminated interval");
      }
      const std::string between = Trim(rest.substr(pos, open - pos));
      if (!box.empty() && between != "x") {
        FileError("sets", "bounding_box", bb->line,
                  "intervals must be separated by 'x'");
      }
      box.push_back(ParseInterval(rest.substr(open, close - open + 1), "sets",
                                  "bounding_box", bb->line));
      pos = close + 1;
    }
    if (!Trim(rest.substr(pos)).empty() || static_cast<int>(box.size()) != n) {
      FileError("sets", "bounding_box", bb->line,
                "expected " + std::to_string(n) + " intervals");
    }
    for (const Interval& iv : box) {
      if (!(iv.hi > iv.lo)) {
        FileError("sets", "bounding_box", bb->line, "degenerate interval");
      }
    }
    p.bounding_box = box;
  }

  p.inputs.assign(m, InputRange{});
  if (auto s = sections.find("inputs"); s != sections.end()) {
    for (const auto& [key, entry] : s->second) {
      auto it = std::find(p.input_names.begin(), p.input_names.end(), key);
      if (it == p.input_names.end()) {
        FileError("inputs", key, entry.line, "unknown input name");
      }
      const int j = static_cast<int>(it - p.input_names.begin());
      if (entry.value == "free") continue;
      const Interval iv = ParseInterval(entry.value, "inputs", key, entry.line);
      p.inputs[j] = InputRange{iv.lo, iv.hi};
    }
  }

  if (const Entry* k = Find(sections, "nominal", "k")) {
    for (const auto& s : ParseStringList(k->value, "nominal", "k", k->line)) {
      p.nominal.push_back(ParseIn(s, names, "nominal", "k", k->line));
    }
    if (static_cast<int>(p.nominal.size()) != m) {
      FileError("nominal", "k", k->line,
                "expected " + std::to_string(m) + " entries");
    }
  } else {
    p.nominal.assign(m, Polynomial(n));
  }

  if (const Entry* d = Find(sections, "template", "degree")) {
    const double v = ParseNumber(d->value, "template", "degree", d->line);
    if (v < 0 || v != std::floor(v) || v > 8) {
      FileError("template", "degree", d->line, "degree must be an integer 0..8");
    }
    p.template_degree = static_cast<int>(v);
  }
  return p;
}

ReachAvoidProblem LoadProblem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw std::runtime_error("error reading '" + path + "'");
  return ParseProblem(buf.str());
}

std::string FormatProblem(const ReachAvoidProblem& p) {
  const auto& names = p.state_names;
  auto quote = [&](const Polynomial& q) {
    return "\"" + q.ToString(names) + "\"";
  };
  auto join_words = [](const std::vector<std::string>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + w[i];
    return s;
  };
  auto matrix = [&](const std::vector<std::vector<Polynomial>>& rows) {
    std::string s = "[ ";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i) s += " ; ";
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        if (j) s += ", ";
        s += quote(rows[i][j]);
      }
    }
    return s + " ]";
  };
  std::ostringstream os;
  os << "[system]\n";
  os << "vars = " << join_words(p.state_names) << "\n";
  os << "inputs = " << join_words(p.input_names) << "\n";
  os << "f = ";
  for (std::size_t i = 0; i < p.system.f.size(); ++i) {
    os << (i ? ", " : "") << quote(p.system.f[i]);
  }
  os << "\ng = " << matrix(p.system.g) << "\n";
  if (p.system.sigma) os << "sigma = " << matrix(*p.system.sigma) << "\n";
  os << "\n[sets]\nsafe_h = " << quote(p.h) << "\n";
  os << "target_hr = " << quote(p.h_r) << "\n";
  os << "bounding_box = ";
  for (std::size_t i = 0; i < p.bounding_box.size(); ++i) {
    os << (i ? " x " : "") << "[" << FormatDouble(p.bounding_box[i].lo) << ", "
       << FormatDouble(p.bounding_box[i].hi) << "]";
  }
  os << "\n\n[inputs]\n";
  for (std::size_t j = 0; j < p.inputs.size(); ++j) {
    os << p.input_names[j] << " = ";
    if (p.inputs[j].free()) {
      os << "free\n";
    } else {
      os << "[" << FormatDouble(*p.inputs[j].lo) << ", "
         << FormatDouble(*p.inputs[j].hi) << "]\n";
    }
  }
  os << "\n[nominal]\nk = ";
  for (std::size_t j = 0; j < p.nominal.size(); ++j) {
    os << (j ? ", " : "") << quote(p.nominal[j]);
  }
  os << "\n\n[template]\ndegree = " << p.template_degree << "\n";
  return os.str();
}

std::vector<Diagnostic> ValidateAssumptions(const ReachAvoidProblem& p,
                                            int resolution) {
  std::vector<Diagnostic> out;
  const int n = p.n();
  const int per_axis = PointsPerAxisForBudget(n, resolution);
  const CompiledPolynomial h(p.h), hr(p.h_r);

  BoxGrid grid(p.bounding_box, per_axis, BoxGrid::Kind::kVertex);
  std::vector<double> x(n);
  bool intersect = false;
  double max_h_on_target = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    grid.Point(i, x.data());
    const double hv = h(x), hrv = hr(x);
    if (hv > 0 && hrv < 0) intersect = true;
    if (hrv <= 0) max_h_on_target = std::max(max_h_on_target, hv);
  }
  if (!intersect) {
    out.push_back({"nonempty_intersection",
                   "no sampled point lies in both the safe set {h > 0} and the "
                   "target set {h_r < 0}"});
  }

  // Inflate the box by half its width on every side and look for points of
  // {h >= 0} outside the original box.
  std::vector<Interval> inflated = p.bounding_box;
  for (auto& iv : inflated) {
    const double w = iv.hi - iv.lo;
    iv.lo -= 0.5 * w;
    iv.hi += 0.5 * w;
  }
  BoxGrid outer(inflated, per_axis, BoxGrid::Kind::kVertex);
  for (std::int64_t i = 0; i < outer.size(); ++i) {
    outer.Point(i, x.data());
    bool outside = false;
    for (int d = 0; d < n; ++d) {
      if (x[d] < p.bounding_box[d].lo || x[d] > p.bounding_box[d].hi) {
        outside = true;
      }
    }
    if (outside && h(x) >= 0) {
      std::ostringstream os;
      os << "h >= 0 at a sampled point outside the bounding box (";
      for (int d = 0; d < n; ++d) os << (d ? ", " : "") << x[d];
      os << ")";
      out.push_back({"bounded_safe_set", os.str()});
      break;
    }
  }

  if (p.system.stochastic() && max_h_on_target > 1.0 + 1e-9) {
    std::ostringstream os;
    os << "max of h over the sampled target set is " << max_h_on_target
       << " > 1";
    out.push_back({"h_le_one_on_target", os.str()});
  }

  out.push_back({"no_isolated_point",
                 "absence of isolated points in the safe/target intersection is "
                 "not certified (sampling only)",
                 false});
  return out;
}

bool HasFailure(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.verified; });
}

}  // namespace reachsynth
