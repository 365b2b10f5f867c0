#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "wre/estimates.hpp"
#include "wre/grid.hpp"
#include "wre/potential.hpp"

namespace wre {

/// Invalid config syntax, unknown keys, or bad values: usage errors as
/// opposed to numerical preconditions.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Plain key = value configuration: one pair per line, '#' comments,
/// blank lines ignored. Duplicate keys are errors.
struct RunConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& def = "") const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  double require_double(const std::string& key) const;
  std::string require(const std::string& key) const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// Every key present must be in allowed; the first offender is named.
void validate_keys(const RunConfig& c, const std::set<std::string>& allowed);

Grid grid_from_config(const RunConfig& c);
TimeAxis time_from_config(const RunConfig& c);
/// Potential from the potential* keys, scaled by the optional coupling.
Potential potential_from_config(const RunConfig& c, const Grid& g);
WeightMode mode_from_config(const RunConfig& c);

}  // namespace wre
