#include "recsim/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "recsim/gp.hpp"

namespace recsim {

ParamSpace::ParamSpace(std::vector<ParamDim> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("ParamSpace: no dimensions");
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (!std::isfinite(d.lower) || !std::isfinite(d.upper))
      throw std::invalid_argument("ParamSpace: bounds must be finite for " +
                                  d.name);
    if (!(d.lower < d.upper))
      throw std::invalid_argument("ParamSpace: lower >= upper for " + d.name);
    for (std::size_t j = 0; j < i; ++j)
      if (dims_[j].name == d.name)
        throw std::invalid_argument("ParamSpace: duplicate name " + d.name);
  }
}

std::vector<double> ParamSpace::from_unit(const std::vector<double>& u) const {
  if (u.size() != dims_.size())
    throw std::invalid_argument("ParamSpace: dimension mismatch");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& d = dims_[i];
    double v = d.lower + std::clamp(u[i], 0.0, 1.0) * (d.upper - d.lower);
    if (d.integer) v = std::clamp(std::round(v), d.lower, d.upper);
    out[i] = v;
  }
  return out;
}

std::map<std::string, double> ParamSpace::named(
    const std::vector<double>& values) const {
  if (values.size() != dims_.size())
    throw std::invalid_argument("ParamSpace: dimension mismatch");
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out[dims_[i].name] = values[i];
  return out;
}

namespace {

constexpr std::array<double, 4> kNanKl = {
    std::numeric_limits<double>::quiet_NaN(),
    std::numeric_limits<double>::quiet_NaN(),
    std::numeric_limits<double>::quiet_NaN(),
    std::numeric_limits<double>::quiet_NaN()};

double clamp_objective(double v) {
  return std::isfinite(v) ? v : kObjectiveSentinel;
}

// Latin hypercube: each dimension gets one draw per stratum, strata order
// permuted independently per dimension.
std::vector<std::vector<double>> latin_hypercube(std::size_t points,
                                                 std::size_t dims, Rng& rng) {
  std::vector<std::vector<double>> out(points, std::vector<double>(dims));
  std::vector<std::size_t> order(points);
  for (std::size_t d = 0; d < dims; ++d) {
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    for (std::size_t p = 0; p < points; ++p)
      out[p][d] = (static_cast<double>(order[p]) + rng.uniform()) /
                  static_cast<double>(points);
  }
  return out;
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(6.283185307179586);
}

double expected_improvement(double best, double mean, double sd) {
  if (sd <= 0.0) return std::max(best - mean, 0.0);
  const double z = (best - mean) / sd;
  return (best - mean) * norm_cdf(z) + sd * norm_pdf(z);
}

struct Recorder {
  const Objective& objective;
  const ParamSpace& space;
  CalibrationResult result;
  std::vector<std::vector<double>> unit_points;
  std::vector<double> values;  // clamped objective values

  double eval(const std::vector<double>& unit) {
    const auto params = space.from_unit(unit);
    const double value = clamp_objective(objective(params));
    unit_points.push_back(unit);
    values.push_back(value);
    result.trace.push_back({params, kNanKl, value});
    if (result.trace.size() == 1 || value < result.best_loss) {
      result.best_loss = value;
      result.best_params = params;
    }
    return value;
  }
};

}  // namespace

CalibrationResult minimize(const Objective& objective, const ParamSpace& space,
                           const MinimizeOptions& options, Rng& rng) {
  if (options.init_points < 2)
    throw std::invalid_argument("minimize: init_points must be >= 2");
  if (options.budget < options.init_points)
    throw std::invalid_argument("minimize: budget must be >= init_points");

  Recorder rec{objective, space, {}, {}, {}};
  for (const auto& d : space.dims()) rec.result.param_names.push_back(d.name);

  for (const auto& unit :
       latin_hypercube(options.init_points, space.size(), rng))
    rec.eval(unit);

  const std::size_t dims = space.size();
  for (std::size_t step = options.init_points; step < options.budget; ++step) {
    // log-shift the objective so huge penalty values cannot flatten the fit
    double ymin = *std::min_element(rec.values.begin(), rec.values.end());
    std::vector<double> transformed(rec.values.size());
    for (std::size_t i = 0; i < rec.values.size(); ++i)
      transformed[i] = std::log1p(rec.values[i] - ymin);

    GaussianProcess gp;
    gp.fit(rec.unit_points, transformed);
    const double best_t = 0.0;  // log1p(ymin - ymin)

    // candidate pool: uniform exploration plus perturbations of the best
    const std::size_t best_idx =
        std::min_element(rec.values.begin(), rec.values.end()) -
        rec.values.begin();
    const auto& best_unit = rec.unit_points[best_idx];
    std::vector<std::vector<double>> candidates;
    const std::size_t uniform_count = 1000 + 250 * dims;
    candidates.reserve(uniform_count + 40);
    for (std::size_t i = 0; i < uniform_count; ++i) {
      std::vector<double> c(dims);
      for (auto& v : c) v = rng.uniform();
      candidates.push_back(std::move(c));
    }
    for (const double scale : {0.05, 0.01}) {
      for (std::size_t i = 0; i < 20; ++i) {
        std::vector<double> c(dims);
        for (std::size_t d = 0; d < dims; ++d)
          c[d] = std::clamp(best_unit[d] + scale * rng.normal(), 0.0, 1.0);
        candidates.push_back(std::move(c));
      }
    }

    std::size_t pick = 0;
    double pick_ei = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto pred = gp.predict(candidates[i]);
      const double ei = expected_improvement(best_t, pred.mean, pred.sd);
      if (ei > pick_ei) {
        pick_ei = ei;
        pick = i;
      }
    }
    rec.eval(candidates[pick]);
  }
  return std::move(rec.result);
}

CalibrationResult minimize_random(const Objective& objective,
                                  const ParamSpace& space,
                                  const MinimizeOptions& options, Rng& rng) {
  if (options.budget < 1)
    throw std::invalid_argument("minimize_random: budget must be >= 1");
  Recorder rec{objective, space, {}, {}, {}};
  for (const auto& d : space.dims()) rec.result.param_names.push_back(d.name);
  for (std::size_t i = 0; i < options.budget; ++i) {
    std::vector<double> unit(space.size());
    for (auto& v : unit) v = rng.uniform();
    rec.eval(unit);
  }
  return std::move(rec.result);
}

double relative_loss(double kl, double best_kl) {
  if (!(best_kl > 0.0))
    throw std::invalid_argument("relative_loss: best_kl must be > 0");
  return (kl - best_kl) / best_kl * 100.0;
}

double average_relative_loss(const std::array<double, 4>& kls,
                             const BestDivergences& bests) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    sum += relative_loss(kls[i], bests.values[i]);
  return sum / 4.0;
}

std::string combo_name(const ModelCombo& combo) {
  std::string name = combo.pref == PrefModel::kIbp ? "ibp" : "lda";
  name += combo.obs == ObsModel::kUniform ? "-uniform" : "-popular";
  return name;
}

namespace {

double require(const std::map<std::string, double>& params,
               const std::string& key) {
  const auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument("evaluate_config: missing parameter '" + key +
                                "'");
  return it->second;
}

}  // namespace

std::array<double, 4> evaluate_config(const std::map<std::string, double>& params,
                                      const ModelCombo& combo,
                                      const CharacteristicStats& target,
                                      const SimulationSettings& settings,
                                      Rng& rng, std::size_t* degenerate) {
  if (settings.replications < 1)
    throw std::invalid_argument("evaluate_config: replications must be >= 1");
  if (settings.sim_users < 1)
    throw std::invalid_argument("evaluate_config: sim_users must be >= 1");

  // construct parameter objects up front so validation errors surface here
  const ParetoParams pareto(require(params, "shape"), settings.pareto_floor,
                            settings.truncation);
  const bool is_ibp = combo.pref == PrefModel::kIbp;
  const IbpParams ibp = is_ibp
                            ? IbpParams(require(params, "alpha"),
                                        require(params, "sigma"),
                                        require(params, "c"))
                            : IbpParams(1.0, 0.0, 1.0);
  const LdaParams lda =
      is_ibp ? LdaParams(1.0, 1.0, 1, 1.0, 1)
             : LdaParams(require(params, "a"), require(params, "b"),
                         static_cast<std::uint32_t>(std::max(
                             1.0, std::round(require(params, "k")))),
                         require(params, "lambda"), settings.lda_num_items);

  std::vector<std::uint64_t> seeds(settings.replications);
  for (auto& s : seeds) s = rng.raw();

  std::array<double, 4> total = {0.0, 0.0, 0.0, 0.0};
  std::size_t bad = 0;
  for (const auto seed : seeds) {
    std::array<double, 4> kl;
    try {
      Rng gen_rng(derive_seed(seed, 0, "prefgen"));
      const PreferenceData pref =
          is_ibp ? generate_ibp(ibp, settings.sim_users, gen_rng)
                 : generate_lda(lda, settings.sim_users, gen_rng);
      if (pref.num_users() == 0) throw std::runtime_error("all users dropped");

      Rng obs_rng(derive_seed(seed, 0, "obsgen"));
      const ObservationData obs = combo.obs == ObsModel::kUniform
                                      ? sample_uniform(pref, pareto, obs_rng)
                                      : sample_popular(pref, pareto, obs_rng);

      Rng stats_rng(derive_seed(seed, 0, "stats"));
      const CharacteristicStats sim =
          characteristic_stats(to_interactions(obs), settings.stats, stats_rng);
      kl[0] = kl_divergence(target.item_pop, sim.item_pop);
      kl[1] = kl_divergence(target.user_act, sim.user_act);
      kl[2] = kl_divergence(target.item_sim, sim.item_sim);
      kl[3] = kl_divergence(target.user_sim, sim.user_sim);
    } catch (const std::runtime_error&) {
      kl = {kPenaltyKl, kPenaltyKl, kPenaltyKl, kPenaltyKl};
      ++bad;
    } catch (const std::invalid_argument&) {
      kl = {kPenaltyKl, kPenaltyKl, kPenaltyKl, kPenaltyKl};
      ++bad;
    }
    for (std::size_t i = 0; i < 4; ++i) total[i] += kl[i];
  }
  if (degenerate) *degenerate += bad;
  for (auto& v : total) v /= static_cast<double>(settings.replications);
  return total;
}

ParamSpace default_space(PrefModel model) {
  if (model == PrefModel::kIbp)
    return ParamSpace({{"alpha", 0.5, 500.0, false},
                       {"sigma", 0.0, 0.95, false},
                       {"c", 0.05, 50.0, false},
                       {"shape", 0.1, 10.0, false}});
  return ParamSpace({{"a", 0.05, 10.0, false},
                     {"b", 0.01, 5.0, false},
                     {"k", 5.0, 200.0, true},
                     {"lambda", 5.0, 500.0, false},
                     {"shape", 0.1, 10.0, false}});
}

namespace {

// floor keeps stage-1 bests usable as denominators even in freak cases
constexpr double kBestKlFloor = 1e-9;

Objective make_stat_objective(const ModelCombo& combo,
                              const CharacteristicStats& target,
                              const ParamSpace& space,
                              const SimulationSettings& settings,
                              std::uint64_t seed, const std::string& tag,
                              std::size_t stat_index,
                              const BestDivergences* bests,
                              std::vector<std::array<double, 4>>* kl_log) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [=, &target, &space](const std::vector<double>& values) {
    Rng eval_rng(derive_seed(seed, (*counter)++, tag));
    const auto kls = evaluate_config(space.named(values), combo, target,
                                     settings, eval_rng);
    if (kl_log) kl_log->push_back(kls);
    if (bests) return average_relative_loss(kls, *bests);
    return kls[stat_index];
  };
}

// minimize evaluates sequentially, so the i-th logged K-L tuple belongs to
// the i-th trace entry
void attach_kls(CalibrationResult& result,
                const std::vector<std::array<double, 4>>& kl_log) {
  for (std::size_t i = 0; i < result.trace.size() && i < kl_log.size(); ++i)
    result.trace[i].stat_kl = kl_log[i];
}

}  // namespace

TwoStageResult calibrate_two_stage(const ModelCombo& combo,
                                   const CharacteristicStats& target,
                                   const ParamSpace& space,
                                   const MinimizeOptions& options,
                                   const SimulationSettings& settings,
                                   std::uint64_t seed,
                                   const BestDivergences* resume_bests) {
  TwoStageResult result;
  result.combo = combo;

  if (resume_bests) {
    result.bests = *resume_bests;
  } else {
    for (std::size_t s = 0; s < 4; ++s) {
      const std::string tag = std::string("stage1-") + kStatNames[s];
      Rng opt_rng(derive_seed(seed, s, "minimize-stage1"));
      std::vector<std::array<double, 4>> kl_log;
      result.stage1[s] =
          minimize(make_stat_objective(combo, target, space, settings, seed,
                                       tag, s, nullptr, &kl_log),
                   space, options, opt_rng);
      attach_kls(result.stage1[s], kl_log);
      result.bests.values[s] =
          std::max(result.stage1[s].best_loss, kBestKlFloor);
    }
  }

  Rng opt_rng(derive_seed(seed, 4, "minimize-stage2"));
  std::vector<std::array<double, 4>> kl_log;
  result.stage2 =
      minimize(make_stat_objective(combo, target, space, settings, seed,
                                   "stage2", 0, &result.bests, &kl_log),
               space, options, opt_rng);
  attach_kls(result.stage2, kl_log);
  result.best_params = space.named(result.stage2.best_params);
  return result;
}

namespace {

nlohmann::json result_to_json(const CalibrationResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) {
    nlohmann::json kl;
    if (std::isfinite(e.stat_kl[0]))
      kl = e.stat_kl;
    else
      kl = nullptr;
    trace.push_back({{"params", e.params}, {"stat_kl", kl}, {"loss", e.loss}});
  }
  return {{"param_names", r.param_names},
          {"best_params", r.best_params},
          {"best_loss", r.best_loss},
          {"trace", trace}};
}

}  // namespace

std::string two_stage_to_json(const TwoStageResult& result, std::uint64_t seed,
                              std::uint64_t config_hash) {
  nlohmann::json j;
  j["version"] = 1;
  j["model"] = combo_name(result.combo);
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  nlohmann::json stage1;
  for (std::size_t s = 0; s < 4; ++s)
    if (!result.stage1[s].trace.empty())
      stage1[kStatNames[s]] = result_to_json(result.stage1[s]);
  j["stage1"] = stage1;
  j["best_divergences"] = {{"item_pop", result.bests.values[0]},
                           {"user_act", result.bests.values[1]},
                           {"item_sim", result.bests.values[2]},
                           {"user_sim", result.bests.values[3]}};
  j["stage2"] = result_to_json(result.stage2);
  nlohmann::json best;
  for (const auto& [k, v] : result.best_params) best[k] = v;
  j["best_params"] = best;
  return j.dump(2) + "\n";
}

BestDivergences bests_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto& b = j.at("best_divergences");
  BestDivergences out;
  out.values = {b.at("item_pop").get<double>(), b.at("user_act").get<double>(),
                b.at("item_sim").get<double>(), b.at("user_sim").get<double>()};
  for (const auto v : out.values)
    if (!(v > 0.0))
      throw std::invalid_argument("bests_from_json: divergences must be > 0");
  return out;
}

}  // namespace recsim
