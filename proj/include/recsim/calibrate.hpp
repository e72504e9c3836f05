#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "recsim/observation.hpp"
#include "recsim/rng.hpp"
#include "recsim/stats.hpp"

namespace recsim {

struct ParamDim {
  std::string name;
  double lower;
  double upper;
  bool integer = false;
};

// Box-bounded search space with named dimensions. Integer dimensions are
// relaxed to continuous during the search and rounded at evaluation time.
class ParamSpace {
 public:
  explicit ParamSpace(std::vector<ParamDim> dims);

  std::size_t size() const { return dims_.size(); }
  const std::vector<ParamDim>& dims() const { return dims_; }

  // unit-cube coordinates <-> native values (rounding integer dims)
  std::vector<double> from_unit(const std::vector<double>& u) const;
  std::map<std::string, double> named(const std::vector<double>& values) const;

 private:
  std::vector<ParamDim> dims_;
};

struct TraceEntry {
  std::vector<double> params;        // native values, space order
  std::array<double, 4> stat_kl;     // NaN-filled for scalar objectives
  double loss;
};

struct CalibrationResult {
  std::vector<std::string> param_names;
  std::vector<double> best_params;
  double best_loss = 0.0;
  std::vector<TraceEntry> trace;
};

using Objective = std::function<double(const std::vector<double>&)>;

struct MinimizeOptions {
  std::size_t budget = 60;
  std::size_t init_points = 10;
};

// Objective values that come back non-finite are clamped to this sentinel so
// the search keeps a total order.
inline constexpr double kObjectiveSentinel = 1e9;

// Sequential model-based minimization: Latin-hypercube start, then a
// Matern-5/2 GP surrogate on the log-shifted objective with expected
// improvement acquisition. The trace has exactly `budget` entries.
CalibrationResult minimize(const Objective& objective, const ParamSpace& space,
                           const MinimizeOptions& options, Rng& rng);

// Budget-matched uniform random search behind the same contract.
CalibrationResult minimize_random(const Objective& objective,
                                  const ParamSpace& space,
                                  const MinimizeOptions& options, Rng& rng);

// Per-statistic best divergences from the single-objective stage; strictly
// positive so they can serve as relative-loss denominators.
struct BestDivergences {
  std::array<double, 4> values;  // kStatNames order
};

// (kl - best) / best, in percent.
double relative_loss(double kl, double best_kl);

// Unweighted mean of the four relative losses, in percent.
double average_relative_loss(const std::array<double, 4>& kls,
                             const BestDivergences& bests);

enum class PrefModel { kIbp, kLda };
enum class ObsModel { kUniform, kPopular };

struct ModelCombo {
  PrefModel pref;
  ObsModel obs;
};

std::string combo_name(const ModelCombo& combo);

// K-L assigned to a replication whose simulation degenerates (all users
// dropped, or too sparse to compute a statistic).
inline constexpr double kPenaltyKl = 50.0;

struct SimulationSettings {
  std::uint32_t sim_users = 1000;
  std::uint32_t lda_num_items = 1000;  // item universe for the LDA model
  std::uint32_t replications = 5;
  std::uint32_t pareto_floor = 1;
  TruncationMode truncation = TruncationMode::kReject;
  StatsOptions stats{100'000, 5, 100};  // sim-side statistic settings
};

// Expected parameter keys: IBP "alpha", "sigma", "c"; LDA "a", "b", "k",
// "lambda"; both combos take the Pareto "shape".
// Runs the generative pipeline `replications` times with seeds drawn from
// rng, computes the observable dataset's statistics, and returns the four
// K-L divergences against the target, averaged over replications. Degenerate
// replications contribute kPenaltyKl in all four slots and are counted in
// *degenerate when provided.
std::array<double, 4> evaluate_config(const std::map<std::string, double>& params,
                                      const ModelCombo& combo,
                                      const CharacteristicStats& target,
                                      const SimulationSettings& settings,
                                      Rng& rng,
                                      std::size_t* degenerate = nullptr);

// Default search space for each preference model (includes the Pareto shape).
ParamSpace default_space(PrefModel model);

struct TwoStageResult {
  ModelCombo combo;
  std::array<CalibrationResult, 4> stage1;  // empty traces when resumed
  BestDivergences bests;
  CalibrationResult stage2;
  std::map<std::string, double> best_params;
};

// Full calibration protocol: stage 1 minimizes each statistic's K-L on its
// own to obtain the best-achievable divergences, stage 2 minimizes the
// average relative loss against those bests. Pass resume_bests to skip
// stage 1.
TwoStageResult calibrate_two_stage(const ModelCombo& combo,
                                   const CharacteristicStats& target,
                                   const ParamSpace& space,
                                   const MinimizeOptions& options,
                                   const SimulationSettings& settings,
                                   std::uint64_t seed,
                                   const BestDivergences* resume_bests = nullptr);

std::string two_stage_to_json(const TwoStageResult& result, std::uint64_t seed,
                              std::uint64_t config_hash);
BestDivergences bests_from_json(const std::string& text);

}  // namespace recsim
