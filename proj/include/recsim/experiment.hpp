#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recsim/calibrate.hpp"
#include "recsim/evaluation.hpp"

namespace recsim {

// One replicated-experiment definition: a generative condition plus the
// evaluation protocol settings.
struct ExperimentSpec {
  PrefModel pref = PrefModel::kIbp;
  ObsModel obs = ObsModel::kUniform;
  std::map<std::string, double> pref_params;  // alpha/sigma/c or a/b/k/lambda
  ParetoParams pareto{1.0, 1, TruncationMode::kClamp};
  std::uint32_t num_users = 1000;
  std::uint32_t lda_num_items = 1000;
  double split_fraction = 0.2;
  std::uint32_t list_length = 50;
  std::uint32_t replications = 100;
  std::uint64_t master_seed = 0;
  std::uint32_t workers = 0;  // 0 = hardware concurrency
};

// One (run, recommender, metric) outcome under both ground truths.
struct ErrorRecord {
  std::uint32_t run_id;
  std::string pref_model;
  std::string obs_model;
  std::string recommender;
  std::string metric;
  double m_obs;
  double m_truth;
  double error;  // m_obs - m_truth
};

double metric_error(double m_obs, double m_truth);

struct ExperimentResult {
  std::vector<ErrorRecord> records;     // ordered by (run, recommender, metric)
  std::uint32_t requested_replications = 0;
  std::uint32_t effective_replications = 0;
  std::vector<std::string> log;         // skipped runs, short lists, ...
};

inline constexpr std::array<const char*, 3> kRecommenderNames = {
    "Oracle", "Popular", "Random"};

// Runs the full pipeline (generate, observe, split, recommend, measure)
// `replications` times with independent derived seeds. Degenerate runs are
// skipped and logged. Thread-parallel over runs; output order is stable.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Oracle-vs-Popular win percentages per metric, on run-level aggregates.
// Strict inequality; ties count as non-wins.
struct InversionCell {
  std::uint32_t wins = 0;
  std::uint32_t ties = 0;
  std::uint32_t runs = 0;
  double pct() const {
    return runs == 0 ? 0.0 : 100.0 * static_cast<double>(wins) / runs;
  }
};

struct InversionSummary {
  std::string pref_model;
  std::string obs_model;
  // [metric][0] = observed ground truth, [metric][1] = true ground truth
  std::array<std::array<InversionCell, 2>, 4> cells;
};

std::vector<InversionSummary> inversion_rate(
    const std::vector<ErrorRecord>& records);

// Writes errors.csv, error_summary.csv, inversions.csv and manifest.json.
// Validates inputs and probes the directory before writing anything.
void emit_report(const ExperimentResult& result,
                 const std::vector<InversionSummary>& inversions,
                 const std::string& out_dir, std::uint64_t master_seed,
                 std::uint64_t config_hash);

// errors.csv round trip, used by the report subcommand.
std::vector<ErrorRecord> read_errors_csv(const std::string& path);

}  // namespace recsim
