#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsgibbs/correlators.hpp"
#include "nlsgibbs/observable.hpp"
#include "nlsgibbs/potential.hpp"
#include "nlsgibbs/spectral.hpp"

namespace nlsgibbs {

/// Invalid or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key/value configuration. Keys are "section.key"; INI files map
/// [section] key = value onto them.
class RunConfig {
 public:
  static RunConfig from_ini_file(const std::string& path);
  static RunConfig from_ini_string(const std::string& text);
  static RunConfig from_json(const nlohmann::json& j);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// "section.key=value"
  void apply_override(const std::string& assignment);
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

  std::uint64_t seed() const;
  std::string experiment() const;

  /// key = value lines, sorted by key
  std::string canonical() const;
  nlohmann::json to_json() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& text);

/// Parses "number", "mode:k", "superposition:a:b" or "pair:k:l" against the active modes.
Observable parse_observable(const std::string& name, const std::vector<int>& modes);

Grid grid_from_config(const RunConfig& cfg);
PotentialSpec potential_from_config(const RunConfig& cfg, const Grid& grid);
CorrelationSpec correlation_from_config(const RunConfig& cfg, const Grid& grid);
FlowParams flow_from_config(const RunConfig& cfg);

/// Generic numeric table written with 17 significant digits.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  void write_csv(const std::string& path) const;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct ExperimentResult {
  std::map<std::string, Table> tables;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();

  bool passed() const;
};

struct Preset {
  std::string name;
  std::string description;
  std::string experiment;
  std::map<std::string, std::string> values;
};

const std::vector<Preset>& presets();
RunConfig preset_config(const std::string& name);

/// Names accepted by run_experiment.
const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const std::string& name, const RunConfig& cfg);

/// Runs the experiment named in the config, writes its tables and manifest.json
/// into the output directory, and returns 0 on success, 1 if a check failed.
int run_and_write(const RunConfig& cfg, std::ostream& log);

}  // namespace nlsgibbs
