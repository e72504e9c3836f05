#include "recsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace recsim {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line,
                       const std::string& what) {
  throw std::invalid_argument(origin + ":" + std::to_string(line) + ": " +
                              what);
}

// strips an unquoted trailing comment
std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& text, std::int64_t& iv, double& dv,
                  bool& is_int) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  {
    const auto* begin = t.data();
    const auto* end = begin + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, iv);
    if (ec == std::errc() && ptr == end) {
      is_int = true;
      return true;
    }
  }
  try {
    std::size_t used = 0;
    dv = std::stod(t, &used);
    if (used == t.size()) {
      is_int = false;
      return true;
    }
  } catch (...) {
  }
  return false;
}

ConfigTree::Value parse_scalar(const std::string& raw,
                               const std::string& origin, std::size_t line) {
  const std::string t = trim(raw);
  if (t.empty()) fail(origin, line, "empty value");
  if (t.front() == '"') {
    if (t.size() < 2 || t.back() != '"')
      fail(origin, line, "unterminated string");
    return t.substr(1, t.size() - 2);
  }
  if (t == "true") return true;
  if (t == "false") return false;
  std::int64_t iv;
  double dv;
  bool is_int;
  if (parse_number(t, iv, dv, is_int)) {
    if (is_int) return iv;
    return dv;
  }
  fail(origin, line, "cannot parse value '" + t + "'");
}

ConfigTree::Value parse_array(const std::string& raw, const std::string& origin,
                              std::size_t line) {
  const std::string t = trim(raw);
  if (t.size() < 2 || t.back() != ']') fail(origin, line, "unterminated array");
  const std::string inner = t.substr(1, t.size() - 2);
  std::vector<std::string> parts;
  std::string cur;
  bool in_string = false;
  for (const char ch : inner) {
    if (ch == '"') in_string = !in_string;
    if (ch == ',' && !in_string) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);

  std::vector<double> numbers;
  std::vector<std::string> strings;
  bool any_string = false;
  for (const auto& p : parts) {
    const auto v = parse_scalar(p, origin, line);
    if (std::holds_alternative<std::string>(v)) {
      any_string = true;
      strings.push_back(std::get<std::string>(v));
    } else if (std::holds_alternative<std::int64_t>(v)) {
      numbers.push_back(static_cast<double>(std::get<std::int64_t>(v)));
      strings.push_back(std::to_string(std::get<std::int64_t>(v)));
    } else if (std::holds_alternative<double>(v)) {
      numbers.push_back(std::get<double>(v));
      strings.push_back(p);
    } else {
      fail(origin, line, "unsupported array element");
    }
  }
  if (any_string) return strings;
  return numbers;
}

}  // namespace

ConfigTree ConfigTree::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

ConfigTree ConfigTree::parse(const std::string& text,
                             const std::string& origin) {
  ConfigTree tree;
  tree.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, line_no, "unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, line_no, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(origin, line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (tree.values_.count(full))
      fail(origin, line_no, "duplicate key " + full);
    if (!value.empty() && value.front() == '[')
      tree.values_[full] = parse_array(value, origin, line_no);
    else
      tree.values_[full] = parse_scalar(value, origin, line_no);
  }
  return tree;
}

bool ConfigTree::has(const std::string& key) const {
  return values_.count(key) > 0;
}

const ConfigTree::Value& ConfigTree::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument(origin_ + ": missing required key '" + key +
                                "'");
  return it->second;
}

std::int64_t ConfigTree::get_int(const std::string& key) const {
  const auto& v = require(key);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  throw std::invalid_argument(origin_ + ": key '" + key +
                              "' must be an integer");
}

std::int64_t ConfigTree::get_int(const std::string& key,
                                 std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double ConfigTree::get_double(const std::string& key) const {
  const auto& v = require(key);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  throw std::invalid_argument(origin_ + ": key '" + key +
                              "' must be a number");
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::string ConfigTree::get_string(const std::string& key) const {
  const auto& v = require(key);
  if (std::holds_alternative<std::string>(v)) return std::get<std::string>(v);
  throw std::invalid_argument(origin_ + ": key '" + key +
                              "' must be a string");
}

std::string ConfigTree::get_string(const std::string& key,
                                   const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

bool ConfigTree::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = require(key);
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  throw std::invalid_argument(origin_ + ": key '" + key +
                              "' must be a boolean");
}

std::vector<double> ConfigTree::get_double_array(const std::string& key) const {
  const auto& v = require(key);
  if (std::holds_alternative<std::vector<double>>(v))
    return std::get<std::vector<double>>(v);
  throw std::invalid_argument(origin_ + ": key '" + key +
                              "' must be an array of numbers");
}

std::uint64_t config_hash(const ConfigTree& tree) {
  std::string canon;
  for (const auto& [key, value] : tree.values()) {
    canon += key;
    canon += '=';
    std::visit(
        [&canon](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, bool>) {
            canon += v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, std::int64_t>) {
            canon += std::to_string(v);
          } else if constexpr (std::is_same_v<T, double>) {
            char buf[40];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            canon += buf;
          } else if constexpr (std::is_same_v<T, std::string>) {
            canon += v;
          } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            for (const auto x : v) {
              char buf[40];
              std::snprintf(buf, sizeof(buf), "%.17g,", x);
              canon += buf;
            }
          } else {
            for (const auto& x : v) {
              canon += x;
              canon += ',';
            }
          }
        },
        value);
    canon += '\n';
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : canon) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

PrefModel parse_pref_model(const std::string& name) {
  if (name == "ibp") return PrefModel::kIbp;
  if (name == "lda") return PrefModel::kLda;
  throw std::invalid_argument("unknown preference model '" + name +
                              "' (valid: ibp, lda)");
}

ObsModel parse_obs_model(const std::string& name) {
  if (name == "uniform") return ObsModel::kUniform;
  if (name == "popular") return ObsModel::kPopular;
  throw std::invalid_argument("unknown observation model '" + name +
                              "' (valid: uniform, popular)");
}

TruncationMode parse_truncation(const std::string& name) {
  if (name == "clamp") return TruncationMode::kClamp;
  if (name == "reject") return TruncationMode::kReject;
  throw std::invalid_argument("unknown pareto mode '" + name +
                              "' (valid: clamp, reject)");
}

ParamDim bound_dim(const ConfigTree& tree, const std::string& key,
                   const ParamDim& fallback) {
  if (!tree.has(key)) return fallback;
  const auto bounds = tree.get_double_array(key);
  if (bounds.size() != 2)
    throw std::invalid_argument("config key '" + key +
                                "' must be [lower, upper]");
  return {fallback.name, bounds[0], bounds[1], fallback.integer};
}

std::uint32_t get_count(const ConfigTree& tree, const std::string& key,
                        std::int64_t fallback, std::int64_t min_value) {
  const auto v = tree.get_int(key, fallback);
  if (v < min_value)
    throw std::invalid_argument("config key '" + key + "' must be >= " +
                                std::to_string(min_value));
  return static_cast<std::uint32_t>(v);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_tree(ConfigTree::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_tree(const ConfigTree& tree) {
  ExperimentConfig cfg;
  cfg.config_hash = recsim::config_hash(tree);

  auto& spec = cfg.spec;
  spec.pref = parse_pref_model(tree.get_string("experiment.preference"));
  spec.obs = parse_obs_model(tree.get_string("experiment.observation"));
  spec.num_users = get_count(tree, "experiment.users", 1000, 1);
  spec.replications = get_count(tree, "experiment.replications", 100, 1);
  spec.split_fraction = tree.get_double("experiment.split_fraction", 0.2);
  if (!(spec.split_fraction > 0.0 && spec.split_fraction < 1.0))
    throw std::invalid_argument("experiment.split_fraction must be in (0,1)");
  spec.list_length = get_count(tree, "experiment.list_length", 50, 1);
  spec.master_seed = static_cast<std::uint64_t>(tree.get_int("experiment.seed", 42));
  spec.workers = get_count(tree, "experiment.workers", 0, 0);
  cfg.out_dir = tree.get_string("experiment.out_dir", "out");
  cfg.params_from = tree.get_string("experiment.params_from", "");

  if (spec.pref == PrefModel::kIbp) {
    spec.pref_params["alpha"] = tree.get_double("ibp.alpha");
    spec.pref_params["sigma"] = tree.get_double("ibp.sigma");
    spec.pref_params["c"] = tree.get_double("ibp.c");
    IbpParams check(spec.pref_params["alpha"], spec.pref_params["sigma"],
                    spec.pref_params["c"]);
    (void)check;
  } else {
    spec.pref_params["a"] = tree.get_double("lda.a");
    spec.pref_params["b"] = tree.get_double("lda.b");
    spec.pref_params["k"] = static_cast<double>(tree.get_int("lda.k"));
    spec.pref_params["lambda"] = tree.get_double("lda.lambda");
    spec.lda_num_items = get_count(tree, "lda.items", 1000, 1);
    LdaParams check(spec.pref_params["a"], spec.pref_params["b"],
                    static_cast<std::uint32_t>(tree.get_int("lda.k")),
                    spec.pref_params["lambda"], spec.lda_num_items);
    (void)check;
  }

  spec.pareto = ParetoParams(
      tree.get_double("pareto.shape"),
      get_count(tree, "pareto.floor", 1, 1),
      parse_truncation(tree.get_string("pareto.mode", "clamp")));

  cfg.stats.num_pairs =
      static_cast<std::size_t>(get_count(tree, "stats.pairs", 1'000'000, 1));
  cfg.stats.min_ratings = get_count(tree, "stats.min_ratings", 5, 0);
  cfg.stats.bins = get_count(tree, "stats.bins", 100, 1);

  if (tree.has("calibration.target") || tree.has("calibration.budget")) {
    MinimizeOptions options;
    options.budget = get_count(tree, "calibration.budget", 60, 1);
    options.init_points = get_count(tree, "calibration.init_points", 10, 2);
    if (options.budget < options.init_points)
      throw std::invalid_argument(
          "calibration.budget must be >= calibration.init_points");

    SimulationSettings settings;
    settings.sim_users = get_count(tree, "calibration.sim_users", 1000, 1);
    settings.lda_num_items =
        get_count(tree, "calibration.lda_items",
                  spec.pref == PrefModel::kLda ? spec.lda_num_items : 1000, 1);
    settings.replications = get_count(tree, "calibration.replications", 5, 1);
    settings.pareto_floor = get_count(tree, "calibration.pareto_floor", 1, 1);
    settings.truncation = parse_truncation(
        tree.get_string("calibration.pareto_mode", "reject"));
    settings.stats.num_pairs = static_cast<std::size_t>(
        get_count(tree, "calibration.pairs", 100'000, 1));
    settings.stats.min_ratings = cfg.stats.min_ratings;
    settings.stats.bins = cfg.stats.bins;

    std::vector<ParamDim> dims;
    if (spec.pref == PrefModel::kIbp) {
      dims.push_back(bound_dim(tree, "calibration.bounds.alpha",
                               {"alpha", 0.5, 500.0, false}));
      dims.push_back(bound_dim(tree, "calibration.bounds.sigma",
                               {"sigma", 0.0, 0.95, false}));
      dims.push_back(
          bound_dim(tree, "calibration.bounds.c", {"c", 0.05, 50.0, false}));
    } else {
      dims.push_back(
          bound_dim(tree, "calibration.bounds.a", {"a", 0.05, 10.0, false}));
      dims.push_back(
          bound_dim(tree, "calibration.bounds.b", {"b", 0.01, 5.0, false}));
      dims.push_back(
          bound_dim(tree, "calibration.bounds.k", {"k", 5.0, 200.0, true}));
      dims.push_back(bound_dim(tree, "calibration.bounds.lambda",
                               {"lambda", 5.0, 500.0, false}));
    }
    dims.push_back(bound_dim(tree, "calibration.bounds.shape",
                             {"shape", 0.1, 10.0, false}));

    cfg.calibration = CalibrationConfig{
        options, settings, ParamSpace(std::move(dims)),
        tree.get_string("calibration.target", "")};
  }

  return cfg;
}

}  // namespace recsim
