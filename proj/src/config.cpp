#include "wre/config.hpp"

#include <fstream>
#include <sstream>

#include "wre/solver.hpp"

namespace wre {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Point parse_point(const std::string& s, const std::string& key) {
  Point p{0, 0, 0};
  std::istringstream is(s);
  std::string tok;
  int i = 0;
  while (std::getline(is, tok, ',')) {
    if (i >= 3) throw ConfigError("too many components in '" + key + "'");
    try {
      p[i++] = std::stod(trim(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad number in '" + key + "': " + tok);
    }
  }
  if (i == 0) throw ConfigError("empty value for '" + key + "'");
  return p;
}

}  // namespace

std::string RunConfig::get(const std::string& key, const std::string& def) const {
  auto it = values.find(key);
  return it == values.end() ? def : it->second;
}

double RunConfig::get_double(const std::string& key, double def) const {
  auto it = values.find(key);
  if (it == values.end()) return def;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("value of '" + key + "' is not a number: " + it->second);
  }
}

int RunConfig::get_int(const std::string& key, int def) const {
  double v = get_double(key, def);
  int i = static_cast<int>(v);
  if (i != v) throw ConfigError("value of '" + key + "' is not an integer");
  return i;
}

double RunConfig::require_double(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  return get_double(key, 0);
}

std::string RunConfig::require(const std::string& key) const {
  if (!has(key)) throw ConfigError("missing required key '" + key + "'");
  return values.at(key);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig c;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (c.values.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    c.values[key] = val;
  }
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void validate_keys(const RunConfig& c, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : c.values)
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "'");
}

Grid grid_from_config(const RunConfig& c) {
  int n = c.get_int("n", 1);
  int N = c.get_int("N", 32);
  double L = c.get_double("L", 8.0);
  try {
    return Grid(n, N, L);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad grid: ") + e.what());
  }
}

TimeAxis time_from_config(const RunConfig& c) {
  TimeAxis t{0.0, c.get_double("T", 4.0), c.get_int("Nt", 64)};
  if (!(t.t1 > 0) || t.Nt < 2) throw ConfigError("bad time axis: need T > 0 and Nt >= 2");
  return t;
}

WeightMode mode_from_config(const RunConfig& c) {
  std::string m = c.get("mode", "support");
  if (m == "support") return WeightMode::support_restricted;
  if (m == "floor") return WeightMode::floor_regularized;
  throw ConfigError("unknown weight mode '" + m + "' (support | floor)");
}

Potential potential_from_config(const RunConfig& c, const Grid& g) {
  std::string kind = c.get("potential", "zero");
  double a = c.get_double("potential_a", 1.0);
  Potential V;
  if (kind == "zero") {
    V = Potential();
  } else if (kind == "constant") {
    V = Potential::constant(a);
  } else if (kind == "inverse-square") {
    double r1 = c.has("potential_r1") ? c.require_double("potential_r1")
                                      : std::numeric_limits<double>::infinity();
    V = Potential::inverse_square(a, c.get_double("potential_r0", 0.0), r1);
  } else if (kind == "power") {
    double r1 = c.has("potential_r1") ? c.require_double("potential_r1")
                                      : std::numeric_limits<double>::infinity();
    V = Potential::power(a, c.get_double("potential_gamma", 1.0),
                         c.get_double("potential_r0", 0.0), r1);
  } else if (kind == "gaussian") {
    V = Potential::gaussian(a, c.get_double("potential_s", 1.0));
  } else if (kind == "ball") {
    V = Potential::ball(a, parse_point(c.get("potential_center", "0,0,0"), "potential_center"),
                        c.get_double("potential_radius", 1.0));
  } else if (kind == "cube") {
    V = Potential::cube(a, parse_point(c.get("potential_center", "0,0,0"), "potential_center"),
                        c.get_double("potential_side", 1.0));
  } else if (kind == "strip") {
    Point v = parse_point(c.get("potential_v", "1,0,0"), "potential_v");
    V = Potential::strip(a, v, c.get_double("potential_lo", -1.0), c.get_double("potential_hi", 1.0));
  } else {
    throw ConfigError("unknown potential '" + kind + "'");
  }
  double coupling = c.get_double("coupling", 1.0);
  if (coupling != 1.0) V = scale_coupling(V, coupling, g);
  return V;
}

}  // namespace wre
