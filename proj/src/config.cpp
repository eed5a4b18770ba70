#include "pvs/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "pvs/errors.hpp"
#include "pvs/io.hpp"

namespace pvs {

namespace {

struct RawValue {
  std::string text;              // scalar token (unquoted)
  std::vector<std::string> list; // array elements (unquoted)
  bool is_list = false;
  bool was_quoted = false;       // scalar came from a quoted string
  mutable bool used = false;
};

using KeyMap = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Strip a trailing comment, respecting quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

/// One scalar token: quoted string or bare number/boolean.
std::string parse_scalar(const std::string& tok, int line, bool& was_quoted) {
  std::string t = trim(tok);
  if (t.empty())
    throw ConfigError("config line " + std::to_string(line) + ": empty value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      throw ConfigError("config line " + std::to_string(line) + ": unterminated string");
    was_quoted = true;
    return t.substr(1, t.size() - 2);
  }
  was_quoted = false;
  return t;
}

KeyMap parse_raw(const std::string& text) {
  KeyMap map;
  std::istringstream in(text);
  std::string line, prefix;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      prefix = trim(s.substr(1, s.size() - 2));
      if (prefix.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty section name");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": missing key");
    if (!prefix.empty()) key = prefix + "." + key;
    if (map.count(key))
      throw ConfigError("config: duplicate key `" + key + "`");
    RawValue rv;
    if (!val.empty() && val.front() == '[') {
      if (val.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated array");
      rv.is_list = true;
      std::string body = val.substr(1, val.size() - 2);
      std::string item;
      bool quoted = false;
      for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ',' && !quoted) {
          bool q = false;
          rv.list.push_back(parse_scalar(item, lineno, q));
          item.clear();
        } else {
          item += c;
        }
      }
      if (!trim(item).empty()) {
        bool q = false;
        rv.list.push_back(parse_scalar(item, lineno, q));
      }
    } else {
      rv.text = parse_scalar(val, lineno, rv.was_quoted);
    }
    map[key] = rv;
  }
  return map;
}

const RawValue* find(const KeyMap& map, const std::string& key) {
  auto it = map.find(key);
  if (it == map.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

double to_double(const std::string& s, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0')
    throw ConfigError("config key `" + key + "`: expected a number, got `" + s + "`");
  return v;
}

double get_double(const KeyMap& m, const std::string& key, double fallback) {
  const RawValue* rv = find(m, key);
  if (!rv) return fallback;
  if (rv->is_list) throw ConfigError("config key `" + key + "`: expected a scalar, got an array");
  return to_double(rv->text, key);
}

long long get_int(const KeyMap& m, const std::string& key, long long fallback) {
  double v = get_double(m, key, static_cast<double>(fallback));
  long long i = static_cast<long long>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config key `" + key + "`: expected an integer");
  return i;
}

std::uint64_t get_u64(const KeyMap& m, const std::string& key, std::uint64_t fallback) {
  const RawValue* rv = find(m, key);
  if (!rv) return fallback;
  if (rv->is_list) throw ConfigError("config key `" + key + "`: expected a scalar, got an array");
  errno = 0;
  char* end = nullptr;
  std::uint64_t v = std::strtoull(rv->text.c_str(), &end, 10);
  if (errno != 0 || end == rv->text.c_str() || *end != '\0')
    throw ConfigError("config key `" + key + "`: expected an unsigned integer, got `" + rv->text +
                      "`");
  return v;
}

std::string get_string(const KeyMap& m, const std::string& key, const std::string& fallback) {
  const RawValue* rv = find(m, key);
  if (!rv) return fallback;
  if (rv->is_list) throw ConfigError("config key `" + key + "`: expected a scalar, got an array");
  return rv->text;
}

std::vector<std::string> get_string_list(const KeyMap& m, const std::string& key) {
  const RawValue* rv = find(m, key);
  if (!rv) return {};
  if (rv->is_list) return rv->list;
  return {rv->text};  // a single scalar is a one-element list
}

std::vector<double> get_double_list(const KeyMap& m, const std::string& key) {
  std::vector<double> out;
  for (const std::string& s : get_string_list(m, key)) out.push_back(to_double(s, key));
  return out;
}

void check_positive(double v, const std::string& key) {
  if (!(v > 0.0)) throw ConfigError("config key `" + key + "`: must be positive");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  KeyMap m = parse_raw(text);
  RunConfig c;

  c.dim = static_cast<int>(get_int(m, "problem.dim", 1));
  if (c.dim < 1 || c.dim > kMaxDim)
    throw ConfigError("config key `problem.dim`: must be between 1 and " +
                      std::to_string(kMaxDim));
  c.T = get_double(m, "problem.T", 1.0);
  check_positive(c.T, "problem.T");
  c.f_family = get_string(m, "problem.F", "zero");
  if (c.f_family != "zero" && c.f_family != "constant" && c.f_family != "heat")
    throw ConfigError("config key `problem.F`: unknown family `" + c.f_family +
                      "` (zero, constant, heat)");
  c.f_param = get_double(m, "problem.F_param", c.f_family == "heat" ? 1.0 : 0.0);
  if (c.f_family == "heat") check_positive(c.f_param, "problem.F_param");
  c.h_exprs = get_string_list(m, "problem.H");
  if (c.h_exprs.empty())
    throw ConfigError("config key `problem.H`: at least one Hamiltonian is required");
  c.u0_expr = get_string(m, "problem.u0", "");
  if (c.u0_expr.empty()) throw ConfigError("config key `problem.u0`: an expression is required");

  c.path_source = get_string(m, "path.source", "brownian");
  if (c.path_source != "brownian" && c.path_source != "formula" && c.path_source != "file")
    throw ConfigError("config key `path.source`: unknown source `" + c.path_source +
                      "` (brownian, formula, file)");
  c.path_seed = get_u64(m, "path.seed", 1);
  c.path_resolution = static_cast<int>(get_int(m, "path.resolution", 1024));
  if (c.path_resolution < 1) throw ConfigError("config key `path.resolution`: must be >= 1");
  c.path_formulas = get_string_list(m, "path.formula");
  c.path_samples = static_cast<int>(get_int(m, "path.samples", 257));
  if (c.path_samples < 2) throw ConfigError("config key `path.samples`: must be >= 2");
  c.path_file = get_string(m, "path.file", "");
  if (c.path_source == "formula" && c.path_formulas.size() != c.h_exprs.size())
    throw ConfigError("config key `path.formula`: need one formula per Hamiltonian component");
  if (c.path_source == "file") {
    if (c.path_file.empty())
      throw ConfigError("config key `path.file`: required when path.source = \"file\"");
    if (!std::filesystem::exists(c.path_file))
      throw ConfigError("config key `path.file`: file does not exist: " + c.path_file);
  }

  c.box_lo = get_double(m, "numerics.box_lo", -1.0);
  c.box_hi = get_double(m, "numerics.box_hi", 1.0);
  if (!(c.box_lo < c.box_hi))
    throw ConfigError("config key `numerics.box_lo`: must be below numerics.box_hi");
  c.nodes = static_cast<int>(get_int(m, "numerics.nodes", 129));
  if (c.nodes < 3) throw ConfigError("config key `numerics.nodes`: must be >= 3");
  c.dt = get_double(m, "numerics.dt", 1e-3);
  check_positive(c.dt, "numerics.dt");
  c.p_bound = get_double(m, "numerics.p_bound", -1.0);
  c.theta_inv = get_double(m, "numerics.theta_inv", 0.1);
  if (!(c.theta_inv > 0.0 && c.theta_inv < 1.0))
    throw ConfigError("config key `numerics.theta_inv`: must lie in (0, 1)");
  c.tol = get_double(m, "numerics.tol", 1e-6);
  check_positive(c.tol, "numerics.tol");
  c.levels = static_cast<int>(get_int(m, "numerics.levels", 3));
  if (c.levels < 1) throw ConfigError("config key `numerics.levels`: must be >= 1");

  c.out_times = get_double_list(m, "output.times");
  for (std::size_t i = 0; i < c.out_times.size(); ++i) {
    if (c.out_times[i] < 0.0 || c.out_times[i] > c.T + 1e-12)
      throw ConfigError("config key `output.times`: times must lie in [0, T]");
    if (i > 0 && c.out_times[i] <= c.out_times[i - 1])
      throw ConfigError("config key `output.times`: times must be strictly increasing");
  }
  c.out_dir = get_string(m, "output.dir", "out");

  for (const auto& kv : m)
    if (!kv.second.used) throw ConfigError("config: unknown key `" + kv.first + "`");
  return c;
}

RunConfig load_config(const std::string& file) { return parse_config(read_text_file(file)); }

GeometricRoughPath build_path(const RunConfig& c) {
  const int m = static_cast<int>(c.h_exprs.size());
  if (c.path_source == "brownian") return brownian_lift(c.path_seed, m, c.T, c.path_resolution);
  if (c.path_source == "file") return read_path_csv(c.path_file);
  // formula: sample W^i(t) on a uniform grid and lift the interpolant
  std::vector<ScalarFieldPtr> comps;
  for (const std::string& f : c.path_formulas) comps.push_back(expr_field(1, f));
  std::vector<double> times(c.path_samples);
  std::vector<VecN> vals(c.path_samples, VecN(m));
  for (int k = 0; k < c.path_samples; ++k) {
    double t = c.T * k / (c.path_samples - 1);
    times[k] = t;
    for (int i = 0; i < m; ++i) vals[k][i] = comps[i]->value(VecN{t});
  }
  return piecewise_linear_lift(times, vals);
}

FOperator build_f(const RunConfig& c) {
  if (c.f_family == "zero") return f_zero();
  if (c.f_family == "constant") return f_constant(c.f_param);
  return f_heat(c.f_param);
}

HamiltonianSystem build_hamiltonians(const RunConfig& c) {
  std::vector<HamiltonianPtr> comps;
  for (const std::string& e : c.h_exprs) {
    bool uses_x = false;  // a variable x1..xn, not the x in "exp"
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
      if (e[i] == 'x' && std::isdigit(static_cast<unsigned char>(e[i + 1])) &&
          (i == 0 || !std::isalpha(static_cast<unsigned char>(e[i - 1]))))
        uses_x = true;
    comps.push_back(uses_x ? expr_hamiltonian(c.dim, e) : x_independent_hamiltonian(c.dim, e));
  }
  return HamiltonianSystem(comps);
}

ScalarFieldPtr build_u0(const RunConfig& c) { return expr_field(c.dim, c.u0_expr); }

PDEProblem build_problem(const RunConfig& c) {
  VecN lo(c.dim);
  for (int d = 0; d < c.dim; ++d) lo[d] = c.box_lo;
  std::array<int, kMaxDim> shape{};
  for (int d = 0; d < c.dim; ++d) shape[d] = c.nodes;
  double dx = (c.box_hi - c.box_lo) / (c.nodes - 1);
  GridSpec grid = GridSpec::make(lo, dx, shape, c.dim);
  return PDEProblem{build_f(c), build_hamiltonians(c), build_path(c),
                    build_u0(c),  c.T,                  grid,
                    c.dt,         c.p_bound};
}

}  // namespace pvs
