#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "recsim/config.hpp"
#include "recsim/dataset.hpp"
#include "recsim/experiment.hpp"

namespace fs = std::filesystem;
using namespace recsim;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct StatsArgs {
  std::string input;
  std::string format = "ml1m";
  std::string delimiter = ",";
  std::uint32_t user_col = 0;
  std::uint32_t item_col = 1;
  bool header = false;
  std::string out = "stats.json";
  std::uint64_t seed = 42;
  std::uint64_t pairs = 1'000'000;
  std::uint32_t min_ratings = 5;
  std::uint32_t bins = 100;
};

int cmd_stats(const StatsArgs& args) {
  ReferenceDataset data;
  if (args.format == "ml1m") {
    data = load_movielens(args.input);
  } else if (args.format == "csv" || args.format == "delimited") {
    if (args.delimiter.size() != 1)
      throw std::invalid_argument("--delimiter must be a single character");
    data = load_delimited(args.input, {args.delimiter[0], args.user_col,
                                       args.item_col, args.header});
  } else {
    throw std::invalid_argument("unknown format '" + args.format +
                                "' (valid: ml1m, csv)");
  }
  std::cerr << "loaded " << data.num_users() << " users, " << data.num_items()
            << " items, " << data.num_pairs() << " pairs from " << args.input
            << "\n";
  StatsOptions options{args.pairs, args.min_ratings, args.bins};
  Rng rng(derive_seed(args.seed, 0, "stats"));
  const auto stats =
      characteristic_stats(data.to_interactions(), options, rng);
  write_file(args.out, stats_to_json(stats));
  std::cerr << "wrote " << args.out << "\n";
  return 0;
}

// applies tuned parameters from a calibration result JSON on top of the
// config's explicit values
void apply_params_from(ExperimentConfig& cfg) {
  if (cfg.params_from.empty()) return;
  const auto j = nlohmann::json::parse(read_file(cfg.params_from));
  const auto& best = j.at("best_params");
  for (const auto& [key, value] : best.items()) {
    if (key == "shape") {
      cfg.spec.pareto = ParetoParams(value.get<double>(),
                                     cfg.spec.pareto.floor,
                                     cfg.spec.pareto.mode);
    } else {
      cfg.spec.pref_params[key] = value.get<double>();
    }
  }
}

int cmd_evaluate(ExperimentConfig cfg, const std::string& config_path) {
  apply_params_from(cfg);
  const auto result = run_experiment(cfg.spec);
  if (result.records.empty())
    throw std::runtime_error("evaluate: every replication degenerated");
  const auto inversions = inversion_rate(result.records);
  emit_report(result, inversions, cfg.out_dir, cfg.spec.master_seed,
              cfg.config_hash);
  // keep an exact copy of the experiment definition next to its outputs
  write_file(fs::path(cfg.out_dir) / "config.toml", read_file(config_path));
  std::cerr << "evaluate: " << result.effective_replications << "/"
            << result.requested_replications << " replications, "
            << result.records.size() << " records -> " << cfg.out_dir << "\n";
  for (const auto& line : result.log) std::cerr << "  note: " << line << "\n";
  return 0;
}

int cmd_calibrate(const ExperimentConfig& cfg, bool resume) {
  if (!cfg.calibration)
    throw std::invalid_argument("config has no [calibration] section");
  const auto& cal = *cfg.calibration;
  if (cal.target_path.empty())
    throw std::invalid_argument("calibration.target must name a stats JSON");
  const auto target = stats_from_json(read_file(cal.target_path));

  const ModelCombo combo{cfg.spec.pref, cfg.spec.obs};
  const fs::path out_dir(cfg.out_dir);
  const fs::path result_path =
      out_dir / ("calibration_" + combo_name(combo) + ".json");

  BestDivergences resume_bests;
  const BestDivergences* resume_ptr = nullptr;
  if (resume) {
    if (!fs::exists(result_path))
      throw std::invalid_argument("--resume: no previous result at " +
                                  result_path.string());
    resume_bests = bests_from_json(read_file(result_path));
    resume_ptr = &resume_bests;
    std::cerr << "resuming with stage-1 divergences from "
              << result_path.string() << "\n";
  }

  const auto result =
      calibrate_two_stage(combo, target, cal.space, cal.options, cal.settings,
                          cfg.spec.master_seed, resume_ptr);
  write_file(result_path,
             two_stage_to_json(result, cfg.spec.master_seed, cfg.config_hash));

  std::cerr << "calibrate " << combo_name(combo) << ":\n";
  for (std::size_t s = 0; s < 4; ++s)
    std::cerr << "  best " << kStatNames[s] << " K-L = "
              << result.bests.values[s] << "\n";
  std::cerr << "  stage-2 avg relative loss = " << result.stage2.best_loss
            << "%\n  params:";
  for (const auto& [k, v] : result.best_params)
    std::cerr << ' ' << k << '=' << v;
  std::cerr << "\n  wrote " << result_path.string() << "\n";
  return 0;
}

int cmd_report(const std::string& errors_path, const std::string& out_dir) {
  const auto records = read_errors_csv(errors_path);
  if (records.empty())
    throw std::invalid_argument("report: no records in " + errors_path);
  ExperimentResult result;
  result.records = records;
  std::uint32_t max_run = 0;
  for (const auto& r : records) max_run = std::max(max_run, r.run_id);
  result.requested_replications = max_run + 1;
  result.effective_replications = max_run + 1;
  emit_report(result, inversion_rate(records), out_dir, 0, 0);
  std::cerr << "report: " << records.size() << " records -> " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulated offline-evaluation error measurement"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string config_path;
  std::int64_t seed_override = -1;
  std::int64_t workers_override = -1;
  std::string out_dir_override;
  app.add_option("--config", config_path, "experiment config file (TOML)");
  app.add_option("--seed", seed_override, "master seed override");
  app.add_option("--workers", workers_override, "worker thread override");
  app.add_option("--out-dir", out_dir_override, "output directory override");

  StatsArgs stats_args;
  auto* stats_cmd =
      app.add_subcommand("stats", "compute dataset characteristic statistics");
  stats_cmd->add_option("--input", stats_args.input, "interaction file")
      ->required();
  stats_cmd->add_option("--format", stats_args.format, "ml1m or csv");
  stats_cmd->add_option("--delimiter", stats_args.delimiter, "csv delimiter");
  stats_cmd->add_option("--user-col", stats_args.user_col, "user column");
  stats_cmd->add_option("--item-col", stats_args.item_col, "item column");
  stats_cmd->add_flag("--header", stats_args.header, "skip a header row");
  stats_cmd->add_option("--out", stats_args.out, "output JSON path");
  stats_cmd->add_option("--pairs", stats_args.pairs, "similarity pair budget");
  stats_cmd->add_option("--min-ratings", stats_args.min_ratings,
                        "similarity entity filter");
  stats_cmd->add_option("--bins", stats_args.bins, "similarity bins");

  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "two-stage parameter calibration");
  bool resume = false;
  calibrate_cmd->add_flag("--resume", resume,
                          "reuse persisted stage-1 divergences");

  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "run the replicated evaluation experiment");

  auto* report_cmd =
      app.add_subcommand("report", "recompute summaries from an errors.csv");
  std::string errors_path;
  report_cmd->add_option("--errors", errors_path, "errors.csv path")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (stats_cmd->parsed()) {
      if (seed_override >= 0)
        stats_args.seed = static_cast<std::uint64_t>(seed_override);
      if (!out_dir_override.empty() && stats_args.out == "stats.json")
        stats_args.out = (fs::path(out_dir_override) / "stats.json").string();
      return cmd_stats(stats_args);
    }

    if (report_cmd->parsed()) {
      const std::string out =
          out_dir_override.empty() ? "report_out" : out_dir_override;
      return cmd_report(errors_path, out);
    }

    if (config_path.empty())
      throw std::invalid_argument("--config is required for this subcommand");
    ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (seed_override >= 0)
      cfg.spec.master_seed = static_cast<std::uint64_t>(seed_override);
    if (workers_override >= 0)
      cfg.spec.workers = static_cast<std::uint32_t>(workers_override);
    if (!out_dir_override.empty()) cfg.out_dir = out_dir_override;

    if (calibrate_cmd->parsed()) return cmd_calibrate(cfg, resume);
    if (evaluate_cmd->parsed())
      return cmd_evaluate(std::move(cfg), config_path);
    throw std::invalid_argument("no subcommand given");
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
