#include "recsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

namespace recsim {

double metric_error(double m_obs, double m_truth) {
  if (!std::isfinite(m_obs) || !std::isfinite(m_truth))
    throw std::invalid_argument("metric_error: values must be finite");
  return m_obs - m_truth;
}

namespace {

struct RunOutput {
  // aggregates[recommender][metric][ground truth (0 obs, 1 truth)]
  std::array<std::array<std::array<double, 2>, 4>, 3> aggregates;
  std::vector<std::string> log;
  bool ok = false;
};

double param(const std::map<std::string, double>& params, const char* key) {
  const auto it = params.find(key);
  if (it == params.end())
    throw std::invalid_argument(std::string("missing model parameter '") +
                                key + "'");
  return it->second;
}

RunOutput execute_run(const ExperimentSpec& spec, std::uint32_t run_id) {
  RunOutput out;
  const std::uint64_t run_seed =
      derive_seed(spec.master_seed, run_id, "replication");

  Rng gen_rng(derive_seed(run_seed, 0, "prefgen"));
  PreferenceData pref;
  if (spec.pref == PrefModel::kIbp) {
    const IbpParams params(param(spec.pref_params, "alpha"),
                           param(spec.pref_params, "sigma"),
                           param(spec.pref_params, "c"));
    pref = generate_ibp(params, spec.num_users, gen_rng);
  } else {
    const LdaParams params(param(spec.pref_params, "a"),
                           param(spec.pref_params, "b"),
                           static_cast<std::uint32_t>(std::llround(
                               param(spec.pref_params, "k"))),
                           param(spec.pref_params, "lambda"),
                           spec.lda_num_items);
    pref = generate_lda(params, spec.num_users, gen_rng);
  }
  if (pref.num_users() == 0) {
    out.log.push_back("run " + std::to_string(run_id) +
                      ": no users survived generation, skipped");
    return out;
  }

  Rng obs_rng(derive_seed(run_seed, 0, "obsgen"));
  const ObservationData obs = spec.obs == ObsModel::kUniform
                                  ? sample_uniform(pref, spec.pareto, obs_rng)
                                  : sample_popular(pref, spec.pareto, obs_rng);

  Rng split_rng(derive_seed(run_seed, 0, "split"));
  const SplitData split =
      split_observations(obs, spec.split_fraction, split_rng);
  if (split.evaluable.empty()) {
    out.log.push_back("run " + std::to_string(run_id) +
                      ": no evaluable users after split, skipped");
    return out;
  }

  Rng oracle_rng(derive_seed(run_seed, 0, "rec-oracle"));
  Rng random_rng(derive_seed(run_seed, 0, "rec-random"));
  const std::array<RecList, 3> lists = {
      recommend_oracle(pref, split, spec.list_length, oracle_rng),
      recommend_popular(split, spec.list_length),
      recommend_random(split, spec.list_length, random_rng)};

  for (const auto u : split.evaluable) {
    if (lists[2][u].size() < spec.list_length) {
      out.log.push_back("run " + std::to_string(run_id) + ": user " +
                        std::to_string(u) + " random list short (" +
                        std::to_string(lists[2][u].size()) + ")");
      break;  // one note per run is enough
    }
  }

  for (std::size_t rec = 0; rec < 3; ++rec) {
    const auto obs_metrics = aggregate(evaluate_per_user(
        lists[rec], pref, split, GroundTruth::kObserved, spec.list_length));
    const auto truth_metrics = aggregate(evaluate_per_user(
        lists[rec], pref, split, GroundTruth::kTruth, spec.list_length));
    for (std::size_t m = 0; m < 4; ++m) {
      out.aggregates[rec][m][0] = obs_metrics[m];
      out.aggregates[rec][m][1] = truth_metrics[m];
    }
  }
  out.ok = true;
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.replications < 1)
    throw std::invalid_argument("run_experiment: replications must be >= 1");
  if (!(spec.split_fraction > 0.0 && spec.split_fraction < 1.0))
    throw std::invalid_argument("run_experiment: split_fraction in (0,1)");
  // surface parameter problems before any thread starts
  if (spec.pref == PrefModel::kIbp) {
    IbpParams check(param(spec.pref_params, "alpha"),
                    param(spec.pref_params, "sigma"),
                    param(spec.pref_params, "c"));
    (void)check;
  } else {
    LdaParams check(
        param(spec.pref_params, "a"), param(spec.pref_params, "b"),
        static_cast<std::uint32_t>(std::llround(param(spec.pref_params, "k"))),
        param(spec.pref_params, "lambda"), spec.lda_num_items);
    (void)check;
  }

  std::uint32_t workers = spec.workers;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, spec.replications);

  std::vector<RunOutput> outputs(spec.replications);
  std::atomic<std::uint32_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::uint32_t run = next.fetch_add(1);
      if (run >= spec.replications) return;
      try {
        outputs[run] = execute_run(spec, run);
      } catch (const std::exception& e) {
        outputs[run].ok = false;
        outputs[run].log.push_back("run " + std::to_string(run) +
                                   " failed: " + e.what());
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::uint32_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.requested_replications = spec.replications;
  const std::string pref_name = spec.pref == PrefModel::kIbp ? "ibp" : "lda";
  const std::string obs_name =
      spec.obs == ObsModel::kUniform ? "uniform" : "popular";
  for (std::uint32_t run = 0; run < spec.replications; ++run) {
    auto& out = outputs[run];
    result.log.insert(result.log.end(), out.log.begin(), out.log.end());
    if (!out.ok) continue;
    ++result.effective_replications;
    for (std::size_t rec = 0; rec < 3; ++rec) {
      for (std::size_t m = 0; m < 4; ++m) {
        const double m_obs = out.aggregates[rec][m][0];
        const double m_truth = out.aggregates[rec][m][1];
        result.records.push_back({run, pref_name, obs_name,
                                  kRecommenderNames[rec], kMetricNames[m],
                                  m_obs, m_truth,
                                  metric_error(m_obs, m_truth)});
      }
    }
  }
  return result;
}

namespace {

int metric_index(const std::string& name) {
  for (std::size_t i = 0; i < kMetricNames.size(); ++i)
    if (name == kMetricNames[i]) return static_cast<int>(i);
  return -1;
}

}  // namespace

std::vector<InversionSummary> inversion_rate(
    const std::vector<ErrorRecord>& records) {
  // condition -> run -> metric -> {oracle obs/truth, popular obs/truth}
  struct RunCell {
    std::array<std::optional<double>, 2> oracle;   // [obs, truth]
    std::array<std::optional<double>, 2> popular;
  };
  std::map<std::pair<std::string, std::string>,
           std::map<std::uint32_t, std::array<RunCell, 4>>>
      table;
  for (const auto& r : records) {
    const int m = metric_index(r.metric);
    if (m < 0)
      throw std::invalid_argument("inversion_rate: unknown metric " + r.metric);
    auto& cell = table[{r.pref_model, r.obs_model}][r.run_id][m];
    if (r.recommender == "Oracle") {
      cell.oracle[0] = r.m_obs;
      cell.oracle[1] = r.m_truth;
    } else if (r.recommender == "Popular") {
      cell.popular[0] = r.m_obs;
      cell.popular[1] = r.m_truth;
    }
  }

  std::vector<InversionSummary> out;
  for (const auto& [condition, runs] : table) {
    InversionSummary summary;
    summary.pref_model = condition.first;
    summary.obs_model = condition.second;
    for (const auto& [run, cells] : runs) {
      for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t gt = 0; gt < 2; ++gt) {
          const auto& oracle = cells[m].oracle[gt];
          const auto& popular = cells[m].popular[gt];
          if (!oracle || !popular)
            throw std::invalid_argument(
                "inversion_rate: run " + std::to_string(run) +
                " lacks Oracle or Popular for " + kMetricNames[m]);
          auto& cell = summary.cells[m][gt];
          ++cell.runs;
          if (*oracle > *popular)
            ++cell.wins;
          else if (*oracle == *popular)
            ++cell.ties;
        }
      }
    }
    out.push_back(std::move(summary));
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_pct(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct SummaryKey {
  std::string pref, obs, rec, metric;
  bool operator<(const SummaryKey& o) const {
    return std::tie(pref, obs, rec, metric) <
           std::tie(o.pref, o.obs, o.rec, o.metric);
  }
};

double quantile(const std::vector<double>& sorted, double q) {
  // linear interpolation between order statistics
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

void emit_report(const ExperimentResult& result,
                 const std::vector<InversionSummary>& inversions,
                 const std::string& out_dir, std::uint64_t master_seed,
                 std::uint64_t config_hash) {
  if (result.records.empty())
    throw std::invalid_argument("emit_report: no records to report");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("emit_report: cannot create " + out_dir + ": " +
                             ec.message());
  {
    // probe writability before any report file is opened
    const auto probe = fs::path(out_dir) / ".write_probe";
    std::ofstream f(probe);
    if (!f) throw std::runtime_error("emit_report: " + out_dir + " not writable");
    f.close();
    fs::remove(probe, ec);
  }

  {
    std::ofstream f(fs::path(out_dir) / "errors.csv");
    f << "run_id,pref_model,obs_model,recommender,metric,m_obs,m_truth,error\n";
    for (const auto& r : result.records)
      f << r.run_id << ',' << r.pref_model << ',' << r.obs_model << ','
        << r.recommender << ',' << r.metric << ',' << format_double(r.m_obs)
        << ',' << format_double(r.m_truth) << ',' << format_double(r.error)
        << '\n';
  }

  {
    std::map<SummaryKey, std::vector<double>> groups;
    for (const auto& r : result.records)
      groups[{r.pref_model, r.obs_model, r.recommender, r.metric}].push_back(
          r.error);
    std::ofstream f(fs::path(out_dir) / "error_summary.csv");
    f << "pref_model,obs_model,recommender,metric,n,mean,sd,min,q25,median,"
         "q75,max\n";
    for (auto& [key, errs] : groups) {
      std::sort(errs.begin(), errs.end());
      const auto n = static_cast<double>(errs.size());
      double mean = 0.0;
      for (const auto e : errs) mean += e;
      mean /= n;
      double var = 0.0;
      for (const auto e : errs) var += (e - mean) * (e - mean);
      const double sd = errs.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      f << key.pref << ',' << key.obs << ',' << key.rec << ',' << key.metric
        << ',' << errs.size() << ',' << format_double(mean) << ','
        << format_double(sd) << ',' << format_double(errs.front()) << ','
        << format_double(quantile(errs, 0.25)) << ','
        << format_double(quantile(errs, 0.5)) << ','
        << format_double(quantile(errs, 0.75)) << ','
        << format_double(errs.back()) << '\n';
    }
  }

  {
    std::ofstream f(fs::path(out_dir) / "inversions.csv");
    f << "pref_model,obs_model,ground_truth,P@50,Recall,MRR,nDCG\n";
    for (const auto& s : inversions) {
      for (std::size_t gt = 0; gt < 2; ++gt) {
        f << s.pref_model << ',' << s.obs_model << ','
          << (gt == 0 ? "observed" : "truth");
        for (std::size_t m = 0; m < 4; ++m)
          f << ',' << format_pct(s.cells[m][gt].pct());
        f << '\n';
      }
    }
  }

  {
    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["master_seed"] = master_seed;
    manifest["config_hash"] = config_hash;
    manifest["replications_requested"] = result.requested_replications;
    manifest["replications_effective"] = result.effective_replications;
    manifest["log"] = result.log;
    std::uint32_t ties = 0;
    for (const auto& s : inversions)
      for (const auto& per_metric : s.cells)
        for (const auto& cell : per_metric) ties += cell.ties;
    manifest["inversion_ties"] = ties;
    manifest["notes"] = {
        {"winner_rule", "per-run user-mean aggregates; ties are non-wins"},
        {"recall_depth", "evaluated at the recommendation list length"}};
    std::ofstream f(fs::path(out_dir) / "manifest.json");
    f << manifest.dump(2) << '\n';
  }
}

std::vector<ErrorRecord> read_errors_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("read_errors_csv: cannot open " + path);
  std::string line;
  if (!std::getline(f, line))
    throw std::invalid_argument("read_errors_csv: empty file " + path);
  const std::string expected =
      "run_id,pref_model,obs_model,recommender,metric,m_obs,m_truth,error";
  if (line != expected)
    throw std::invalid_argument("read_errors_csv: unexpected header in " +
                                path);
  std::vector<ErrorRecord> records;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8)
      throw std::invalid_argument("read_errors_csv: bad record at line " +
                                  std::to_string(line_no));
    ErrorRecord r;
    r.run_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
    r.pref_model = fields[1];
    r.obs_model = fields[2];
    r.recommender = fields[3];
    r.metric = fields[4];
    r.m_obs = std::stod(fields[5]);
    r.m_truth = std::stod(fields[6]);
    r.error = std::stod(fields[7]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace recsim
