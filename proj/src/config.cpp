#include "affine/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "affine/format.hpp"

namespace affine {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Removes a trailing comment, honoring double quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + tok.size();
}

struct Cursor {
  const std::string& s;
  size_t pos = 0;
  const std::string& origin;
  int line;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }
};

std::string parse_quoted(Cursor& c) {
  ++c.pos;  // opening quote
  std::string out;
  while (c.pos < c.s.size() && c.s[c.pos] != '"') out += c.s[c.pos++];
  if (c.pos >= c.s.size()) fail(c.origin, c.line, "unterminated string");
  ++c.pos;
  return out;
}

std::string parse_scalar_token(Cursor& c) {
  size_t start = c.pos;
  while (c.pos < c.s.size() && c.s[c.pos] != ',' && c.s[c.pos] != ']' && c.s[c.pos] != '[')
    ++c.pos;
  return trim(c.s.substr(start, c.pos - start));
}

// One array level: all-numbers, all-strings, or rows of numbers.
ConfigValue parse_array(Cursor& c) {
  ++c.pos;  // '['
  std::vector<double> nums;
  std::vector<std::string> strs;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (true) {
    if (c.done()) fail(c.origin, c.line, "unterminated array");
    if (c.peek() == ']') {
      ++c.pos;
      break;
    }
    if (!first) {
      if (c.peek() != ',') fail(c.origin, c.line, "expected ',' in array");
      ++c.pos;
      if (c.peek() == ']') {  // trailing comma
        ++c.pos;
        break;
      }
    }
    first = false;
    char ch = c.peek();
    if (ch == '[') {
      ConfigValue inner = parse_array(c);
      if (!std::holds_alternative<std::vector<double>>(inner.data))
        fail(c.origin, c.line, "arrays nest at most once");
      rows.push_back(std::get<std::vector<double>>(inner.data));
    } else if (ch == '"') {
      strs.push_back(parse_quoted(c));
    } else {
      std::string tok = parse_scalar_token(c);
      double v;
      if (!parse_number(tok, v)) fail(c.origin, c.line, "bad number '" + tok + "'");
      nums.push_back(v);
    }
  }
  if (!rows.empty()) {
    if (!nums.empty() || !strs.empty())
      fail(c.origin, c.line, "array mixes rows with scalars");
    ConfigValue v;
    v.data = rows;
    v.line = c.line;
    return v;
  }
  if (!strs.empty()) {
    if (!nums.empty()) fail(c.origin, c.line, "array mixes strings with numbers");
    ConfigValue v;
    v.data = strs;
    v.line = c.line;
    return v;
  }
  ConfigValue v;
  v.data = nums;
  v.line = c.line;
  return v;
}

ConfigValue parse_value(const std::string& text, const std::string& origin, int line) {
  Cursor c{text, 0, origin, line};
  if (c.done()) fail(origin, line, "missing value");
  ConfigValue v;
  char ch = c.peek();
  if (ch == '[') {
    v = parse_array(c);
  } else if (ch == '"') {
    v.data = parse_quoted(c);
    v.line = line;
  } else {
    std::string tok = trim(text.substr(c.pos));
    double num;
    if (parse_number(tok, num)) {
      v.data = num;
    } else {
      v.data = tok;  // bare word
    }
    v.line = line;
    return v;
  }
  if (!c.done()) fail(origin, line, "trailing characters after value");
  return v;
}

// ---- typed accessors over a parsed section ----

struct SectionView {
  const std::map<std::string, ConfigValue>* sec;
  std::string name;
  std::string origin;
  mutable std::vector<std::string> seen;

  bool has(const std::string& key) const { return sec && sec->count(key) > 0; }

  const ConfigValue& get(const std::string& key) const {
    auto it = sec->find(key);
    if (it == sec->end())
      throw ConfigError(origin + ": section [" + name + "] is missing key '" + key + "'");
    seen.push_back(key);
    return it->second;
  }

  double number(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (!std::holds_alternative<double>(v.data))
      fail(origin, v.line, "'" + key + "' must be a number");
    return std::get<double>(v.data);
  }

  std::string word(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (!std::holds_alternative<std::string>(v.data))
      fail(origin, v.line, "'" + key + "' must be a string");
    return std::get<std::string>(v.data);
  }

  Vec vector(const std::string& key, int want) const {
    const ConfigValue& v = get(key);
    if (!std::holds_alternative<std::vector<double>>(v.data))
      fail(origin, v.line, "'" + key + "' must be a flat array");
    const auto& a = std::get<std::vector<double>>(v.data);
    if ((int)a.size() != want)
      fail(origin, v.line,
           "'" + key + "' has " + std::to_string(a.size()) + " entries, expected " +
               std::to_string(want));
    Vec out(want);
    for (int i = 0; i < want; ++i) out[i] = a[i];
    return out;
  }

  Mat matrix(const std::string& key, int rows, int cols) const {
    const ConfigValue& v = get(key);
    if (!std::holds_alternative<std::vector<std::vector<double>>>(v.data))
      fail(origin, v.line, "'" + key + "' must be an array of rows");
    const auto& rr = std::get<std::vector<std::vector<double>>>(v.data);
    if ((int)rr.size() != rows)
      fail(origin, v.line,
           "'" + key + "' has " + std::to_string(rr.size()) + " rows, expected " +
               std::to_string(rows));
    Mat out(rows, cols);
    for (int i = 0; i < rows; ++i) {
      if ((int)rr[i].size() != cols)
        fail(origin, v.line, "'" + key + "' row " + std::to_string(i + 1) + " has " +
                                 std::to_string(rr[i].size()) + " entries, expected " +
                                 std::to_string(cols));
      for (int j = 0; j < cols; ++j) out(i, j) = rr[i][j];
    }
    return out;
  }

  std::vector<std::string> words(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (std::holds_alternative<std::vector<std::string>>(v.data))
      return std::get<std::vector<std::string>>(v.data);
    fail(origin, v.line, "'" + key + "' must be an array of strings");
  }

  std::vector<double> numbers(const std::string& key) const {
    const ConfigValue& v = get(key);
    if (std::holds_alternative<std::vector<double>>(v.data))
      return std::get<std::vector<double>>(v.data);
    fail(origin, v.line, "'" + key + "' must be a flat array");
  }

  void reject_unknown() const {
    if (!sec) return;
    for (const auto& [key, val] : *sec) {
      bool known = false;
      for (const auto& s : seen)
        if (s == key) known = true;
      if (!known) fail(origin, val.line, "unknown key '" + key + "' in section [" + name + "]");
    }
  }
};

SectionView view(const ConfigFile& cfg, const std::string& name) {
  auto it = cfg.sections.find(name);
  return SectionView{it == cfg.sections.end() ? nullptr : &it->second, name, cfg.origin, {}};
}

// ---- jump distribution sections ----

ScalarLaw scalar_law_of(const std::string& kind, double param, const std::string& origin,
                        int line) {
  try {
    if (kind == "dirac") return ScalarLaw::dirac(param);
    if (kind == "exp") return ScalarLaw::exponential(param);
    if (kind == "halfnormal") return ScalarLaw::half_normal(param);
  } catch (const std::exception& e) {
    fail(origin, line, e.what());
  }
  fail(origin, line, "unknown factor law '" + kind + "' (want dirac, exp, or halfnormal)");
}

JumpDistribution distribution_from_section(const ConfigFile& cfg, const std::string& name,
                                           int dim, bool allow_mixture);

JumpDistribution distribution_from_view(const ConfigFile& cfg, const SectionView& s,
                                        const std::string& name, int dim, bool allow_mixture) {
  std::string kind = s.word("kind");
  if (kind == "dirac") {
    Vec xi = s.vector("xi", dim);
    return JumpDistribution::dirac(xi);
  }
  if (kind == "exp_coord") {
    int coord = (int)s.number("coord");
    double mean = s.number("mean");
    const ConfigValue& cv = s.get("coord");
    if (coord < 1 || coord > dim)
      fail(cfg.origin, cv.line,
           "coord " + std::to_string(coord) + " outside 1.." + std::to_string(dim));
    try {
      return JumpDistribution::exp_coord(dim, coord - 1, mean);
    } catch (const std::exception& e) {
      fail(cfg.origin, cv.line, e.what());
    }
  }
  if (kind == "product") {
    auto laws = s.words("laws");
    auto params = s.numbers("params");
    const ConfigValue& lv = s.get("laws");
    if ((int)laws.size() != dim || params.size() != laws.size())
      fail(cfg.origin, lv.line, "'laws' and 'params' must each have " + std::to_string(dim) +
                                    " entries");
    std::vector<ScalarLaw> factors;
    for (int i = 0; i < dim; ++i) factors.push_back(scalar_law_of(laws[i], params[i], cfg.origin, lv.line));
    try {
      return JumpDistribution::product(factors);
    } catch (const std::exception& e) {
      fail(cfg.origin, lv.line, e.what());
    }
  }
  if (kind == "mixture") {
    const ConfigValue& kv = s.get("kind");
    if (!allow_mixture) fail(cfg.origin, kv.line, "mixtures cannot nest");
    auto weights = s.numbers("weights");
    std::vector<JumpDistribution> parts;
    for (size_t i = 0; i < weights.size(); ++i) {
      std::string sub = name + ".mix." + std::to_string(i + 1);
      if (!cfg.has_section(sub))
        fail(cfg.origin, kv.line, "mixture component section [" + sub + "] not found");
      parts.push_back(distribution_from_section(cfg, sub, dim, false));
    }
    try {
      return JumpDistribution::mixture(weights, parts);
    } catch (const std::exception& e) {
      fail(cfg.origin, kv.line, e.what());
    }
  }
  fail(cfg.origin, s.get("kind").line,
       "unknown kind '" + kind + "' (want dirac, exp_coord, product, or mixture)");
}

JumpDistribution distribution_from_section(const ConfigFile& cfg, const std::string& name,
                                           int dim, bool allow_mixture) {
  SectionView s = view(cfg, name);
  JumpDistribution d = distribution_from_view(cfg, s, name, dim, allow_mixture);
  s.reject_unknown();
  return d;
}

JumpMeasureSpec measure_from_section(const ConfigFile& cfg, const std::string& name, int dim) {
  if (!cfg.has_section(name)) return JumpMeasureSpec::none();
  SectionView s = view(cfg, name);
  double rate = s.number("rate");
  const ConfigValue& rv = s.get("rate");
  if (rate < 0) fail(cfg.origin, rv.line, "rate must be nonnegative");
  if (rate == 0) {
    // Parse anyway so malformed sections do not hide behind a zero rate.
    distribution_from_view(cfg, s, name, dim, true);
    return JumpMeasureSpec::none();
  }
  JumpDistribution d = distribution_from_view(cfg, s, name, dim, true);
  s.reject_unknown();
  return JumpMeasureSpec::of(rate, d);
}

// ---- serialization ----

std::string num_list(const Vec& v) {
  std::string out = "[";
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt17(v[i]);
  }
  return out + "]";
}

std::string row_list(const Mat& a) {
  std::string out = "[";
  for (int i = 0; i < a.rows(); ++i) {
    if (i) out += ", ";
    out += num_list(a.row(i).transpose());
  }
  return out + "]";
}

void write_distribution(std::ostream& os, const std::string& name, const JumpDistribution& d) {
  switch (d.kind()) {
    case JumpDistribution::Kind::Dirac:
      os << "kind = \"dirac\"\n";
      os << "xi = " << num_list(d.dirac_point()) << "\n";
      return;
    case JumpDistribution::Kind::ExpCoord:
      os << "kind = \"exp_coord\"\n";
      os << "coord = " << d.exp_coordinate() + 1 << "\n";
      os << "mean = " << fmt17(d.exp_mean()) << "\n";
      return;
    case JumpDistribution::Kind::Product: {
      os << "kind = \"product\"\n";
      os << "laws = [";
      const auto& laws = d.product_laws();
      for (size_t i = 0; i < laws.size(); ++i) {
        if (i) os << ", ";
        switch (laws[i].kind) {
          case ScalarLaw::Kind::Dirac: os << "\"dirac\""; break;
          case ScalarLaw::Kind::Exponential: os << "\"exp\""; break;
          case ScalarLaw::Kind::HalfNormal: os << "\"halfnormal\""; break;
        }
      }
      os << "]\n";
      os << "params = [";
      for (size_t i = 0; i < laws.size(); ++i) {
        if (i) os << ", ";
        os << fmt17(laws[i].param);
      }
      os << "]\n";
      return;
    }
    case JumpDistribution::Kind::Mixture: {
      os << "kind = \"mixture\"\n";
      os << "weights = [";
      const auto& w = d.mixture_weights();
      for (size_t i = 0; i < w.size(); ++i) {
        if (i) os << ", ";
        os << fmt17(w[i]);
      }
      os << "]\n";
      const auto& parts = d.mixture_components();
      for (size_t i = 0; i < parts.size(); ++i) {
        os << "\n[" << name << ".mix." << i + 1 << "]\n";
        write_distribution(os, name + ".mix." + std::to_string(i + 1), parts[i]);
      }
      return;
    }
  }
}

void write_measure(std::ostream& os, const std::string& name, const JumpMeasureSpec& jm) {
  if (jm.is_zero()) return;
  os << "\n[" << name << "]\n";
  os << "rate = " << fmt17(jm.rate) << "\n";
  write_distribution(os, name, *jm.dist);
}

}  // namespace

ConfigFile parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) fail(origin, line, "empty section name");
      cfg.sections[section];  // section may stay empty
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    if (key.empty()) fail(origin, line, "empty key");
    if (section.empty()) fail(origin, line, "key outside any section");
    if (cfg.sections[section].count(key))
      fail(origin, line, "duplicate key '" + key + "' in section [" + section + "]");
    cfg.sections[section][key] = parse_value(s.substr(eq + 1), origin, line);
  }
  return cfg;
}

ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

AdmissibleParamSet params_from_config(const ConfigFile& cfg) {
  SectionView dim_s = view(cfg, "dim");
  if (!dim_s.sec) throw ConfigError(cfg.origin + ": missing required section [dim]");
  int m = (int)dim_s.number("m");
  int n = (int)dim_s.number("n");
  dim_s.reject_unknown();
  if (m < 0 || n < 0 || m + n < 1)
    throw ConfigError(cfg.origin + ": [dim] needs m >= 0, n >= 0, m + n >= 1");
  StateDim dim{m, n};
  const int d = dim.d();

  AdmissibleParamSet p = AdmissibleParamSet::zero(dim);

  if (cfg.has_section("drift")) {
    SectionView s = view(cfg, "drift");
    if (s.has("b")) p.b = s.vector("b", d);
    if (s.has("beta")) {
      Mat rows = s.matrix("beta", d, d);
      for (int k = 0; k < d; ++k) p.drivers[k].beta = rows.row(k).transpose();
    }
    s.reject_unknown();
  }

  if (cfg.has_section("diffusion")) {
    SectionView s = view(cfg, "diffusion");
    if (s.has("a")) p.a = s.matrix("a", d, d);
    for (int k = 0; k < d; ++k) {
      std::string key = "alpha" + std::to_string(k + 1);
      if (s.has(key)) p.drivers[k].alpha = s.matrix(key, d, d);
    }
    s.reject_unknown();
  }

  if (cfg.has_section("killing")) {
    SectionView s = view(cfg, "killing");
    if (s.has("c")) p.c = s.number("c");
    if (s.has("gamma")) p.gamma = s.vector("gamma", d);
    s.reject_unknown();
  }

  p.m_jumps = measure_from_section(cfg, "jumps.m", d);
  for (int k = 0; k < d; ++k)
    p.drivers[k].jumps = measure_from_section(cfg, "jumps." + std::to_string(k + 1), d);

  for (const auto& [name, _] : cfg.sections) {
    if (name == "dim" || name == "drift" || name == "diffusion" || name == "killing") continue;
    if (name == "jumps.m" || name.rfind("jumps.m.mix.", 0) == 0) continue;
    bool known = false;
    for (int k = 0; k < d && !known; ++k) {
      std::string base = "jumps." + std::to_string(k + 1);
      if (name == base || name.rfind(base + ".mix.", 0) == 0) known = true;
    }
    if (!known) throw ConfigError(cfg.origin + ": unknown section [" + name + "]");
  }

  p.check_shape();
  return p;
}

std::string params_to_config_text(const AdmissibleParamSet& p) {
  const int d = p.dim.d();
  std::ostringstream os;
  os << "[dim]\n";
  os << "m = " << p.dim.m << "\n";
  os << "n = " << p.dim.n << "\n";

  os << "\n[drift]\n";
  os << "b = " << num_list(p.b) << "\n";
  Mat beta(d, d);
  for (int k = 0; k < d; ++k) beta.row(k) = p.drivers[k].beta.transpose();
  os << "beta = " << row_list(beta) << "\n";

  os << "\n[diffusion]\n";
  os << "a = " << row_list(p.a) << "\n";
  for (int k = 0; k < d; ++k)
    os << "alpha" << k + 1 << " = " << row_list(p.drivers[k].alpha) << "\n";

  os << "\n[killing]\n";
  os << "c = " << fmt17(p.c) << "\n";
  os << "gamma = " << num_list(p.gamma) << "\n";

  write_measure(os, "jumps.m", p.m_jumps);
  for (int k = 0; k < d; ++k)
    write_measure(os, "jumps." + std::to_string(k + 1), p.drivers[k].jumps);
  return os.str();
}

ReductionSidecar sidecar_from_config(const ConfigFile& cfg) {
  SectionView s = view(cfg, "reduction");
  if (!s.sec) throw ConfigError(cfg.origin + ": missing required section [reduction]");
  ReductionSidecar out;
  out.added_aux = s.number("added_aux") != 0;
  out.original_dim.m = (int)s.number("original_m");
  out.original_dim.n = (int)s.number("original_n");
  int n = out.original_dim.n;
  if (n > 0 && s.has("frame"))
    out.frame = s.matrix("frame", n, n);
  else
    out.frame = Mat::Zero(n, n);
  s.reject_unknown();
  return out;
}

std::string sidecar_to_config_text(const ReductionSidecar& s) {
  std::ostringstream os;
  os << "[reduction]\n";
  os << "added_aux = " << (s.added_aux ? 1 : 0) << "\n";
  os << "original_m = " << s.original_dim.m << "\n";
  os << "original_n = " << s.original_dim.n << "\n";
  if (s.original_dim.n > 0 && !s.frame.isZero(0.0))
    os << "frame = " << row_list(s.frame) << "\n";
  return os.str();
}

}  // namespace affine
