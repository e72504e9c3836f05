#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "recsim/calibrate.hpp"
#include "recsim/experiment.hpp"

namespace recsim {

// Minimal TOML-style key-value tree: [section] headers (dotted names nest),
// scalar values (integer, float, string, boolean) and flat arrays of numbers
// or strings. Keys are flattened to "section.key".
class ConfigTree {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string,
                             std::vector<double>, std::vector<std::string>>;

  static ConfigTree parse_file(const std::string& path);
  static ConfigTree parse(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  const Value& require(const std::string& key) const;
  std::map<std::string, Value> values_;
  std::string origin_;
};

struct CalibrationConfig {
  MinimizeOptions options;
  SimulationSettings settings;
  ParamSpace space;
  std::string target_path;
};

// Fully validated experiment definition assembled from a config file; every
// referenced parameter has already passed its owning module's constructor.
struct ExperimentConfig {
  ExperimentSpec spec;
  StatsOptions stats;
  std::optional<CalibrationConfig> calibration;
  std::string out_dir = "out";
  std::string params_from;  // optional calibration-result JSON to pull tuned params
  std::uint64_t config_hash = 0;

  static ExperimentConfig load(const std::string& path);
  static ExperimentConfig from_tree(const ConfigTree& tree);
};

// FNV-1a over a canonical rendering of the parsed tree; recorded in run
// manifests so outputs can be traced to an exact configuration.
std::uint64_t config_hash(const ConfigTree& tree);

}  // namespace recsim
