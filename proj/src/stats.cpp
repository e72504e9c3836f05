#include "recsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

namespace recsim {

std::vector<std::uint32_t> Interactions::item_counts() const {
  std::vector<std::uint32_t> counts(num_items, 0);
  for (const auto& prof : profiles)
    for (const auto i : prof) ++counts[i];
  return counts;
}

Interactions to_interactions(const ObservationData& obs) {
  Interactions out;
  out.num_items = obs.parent ? obs.parent->item_universe : 0;
  out.profiles = obs.consumed;
  return out;
}

Interactions to_interactions(const PreferenceData& pref) {
  Interactions out;
  out.num_items = pref.item_universe;
  out.profiles = pref.relevant;
  return out;
}

void DiscreteDistribution::validate() const {
  if (support.size() != mass.size())
    throw std::invalid_argument("DiscreteDistribution: support/mass size mismatch");
  if (support.empty())
    throw std::invalid_argument("DiscreteDistribution: empty support");
  double sum = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (!(mass[i] >= 0.0))
      throw std::invalid_argument("DiscreteDistribution: negative mass");
    if (i > 0 && !(support[i] > support[i - 1]))
      throw std::invalid_argument("DiscreteDistribution: support not increasing");
    sum += mass[i];
  }
  if (std::fabs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("DiscreteDistribution: mass sums to " +
                                std::to_string(sum));
}

namespace {

DiscreteDistribution level_distribution(const std::vector<std::uint32_t>& counts,
                                        bool skip_zero) {
  std::map<std::uint32_t, std::uint32_t> freq;
  std::size_t total = 0;
  for (const auto c : counts) {
    if (skip_zero && c == 0) continue;
    ++freq[c];
    ++total;
  }
  if (total == 0)
    throw std::invalid_argument("level_distribution: no populated entities");
  DiscreteDistribution dist;
  dist.support.reserve(freq.size());
  dist.mass.reserve(freq.size());
  for (const auto& [level, n] : freq) {
    dist.support.push_back(static_cast<double>(level));
    dist.mass.push_back(static_cast<double>(n) / static_cast<double>(total));
  }
  return dist;
}

}  // namespace

DiscreteDistribution popularity_distribution(const Interactions& data) {
  if (data.num_users() == 0)
    throw std::invalid_argument("popularity_distribution: empty dataset");
  return level_distribution(data.item_counts(), /*skip_zero=*/true);
}

DiscreteDistribution activity_distribution(const Interactions& data) {
  if (data.num_users() == 0)
    throw std::invalid_argument("activity_distribution: empty dataset");
  std::vector<std::uint32_t> sizes;
  sizes.reserve(data.num_users());
  for (const auto& prof : data.profiles)
    sizes.push_back(static_cast<std::uint32_t>(prof.size()));
  return level_distribution(sizes, /*skip_zero=*/true);
}

namespace {

std::size_t intersection_size(const std::vector<std::uint32_t>& a,
                              const std::vector<std::uint32_t>& b) {
  std::size_t n = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::vector<std::vector<std::uint32_t>> invert_profiles(
    const Interactions& data) {
  std::vector<std::vector<std::uint32_t>> audiences(data.num_items);
  for (std::size_t u = 0; u < data.num_users(); ++u)
    for (const auto i : data.profiles[u])
      audiences[i].push_back(static_cast<std::uint32_t>(u));
  return audiences;  // user ids appended in increasing order, already sorted
}

}  // namespace

DiscreteDistribution similarity_distribution(const Interactions& data,
                                             SimilarityAxis axis,
                                             std::size_t num_pairs,
                                             std::uint32_t min_ratings,
                                             std::uint32_t bins, Rng& rng) {
  if (bins < 1)
    throw std::invalid_argument("similarity_distribution: bins must be >= 1");
  if (num_pairs < 1)
    throw std::invalid_argument(
        "similarity_distribution: num_pairs must be >= 1");
  std::vector<std::vector<std::uint32_t>> vectors;
  if (axis == SimilarityAxis::kUser) {
    vectors = data.profiles;
  } else {
    vectors = invert_profiles(data);
  }
  std::vector<const std::vector<std::uint32_t>*> qualified;
  for (const auto& v : vectors)
    if (v.size() >= min_ratings) qualified.push_back(&v);
  const std::size_t q = qualified.size();
  if (q < 2)
    throw std::invalid_argument(
        "similarity_distribution: fewer than 2 entities with at least " +
        std::to_string(min_ratings) + " interactions");

  std::vector<std::uint64_t> histogram(bins, 0);
  std::uint64_t total = 0;
  auto accumulate = [&](std::size_t a, std::size_t b) {
    const auto& va = *qualified[a];
    const auto& vb = *qualified[b];
    const double inter = static_cast<double>(intersection_size(va, vb));
    const double sim =
        inter / std::sqrt(static_cast<double>(va.size()) *
                          static_cast<double>(vb.size()));
    auto bin = static_cast<std::size_t>(sim * bins);
    if (bin >= bins) bin = bins - 1;
    ++histogram[bin];
    ++total;
  };

  const double all_pairs = 0.5 * static_cast<double>(q) *
                           static_cast<double>(q - 1);
  if (all_pairs <= static_cast<double>(num_pairs)) {
    for (std::size_t a = 0; a + 1 < q; ++a)
      for (std::size_t b = a + 1; b < q; ++b) accumulate(a, b);
  } else {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(num_pairs * 2);
    while (total < num_pairs) {
      const auto a = static_cast<std::size_t>(rng.uniform_int(q));
      const auto b = static_cast<std::size_t>(rng.uniform_int(q));
      if (a == b) continue;
      const std::uint64_t key =
          static_cast<std::uint64_t>(std::min(a, b)) * q + std::max(a, b);
      if (!seen.insert(key).second) continue;
      accumulate(std::min(a, b), std::max(a, b));
    }
  }

  DiscreteDistribution dist;
  dist.support.resize(bins);
  dist.mass.resize(bins);
  for (std::uint32_t i = 0; i < bins; ++i) {
    dist.support[i] = (i + 0.5) / bins;
    dist.mass[i] = static_cast<double>(histogram[i]) / static_cast<double>(total);
  }
  return dist;
}

double kl_divergence(const DiscreteDistribution& p_obs,
                     const DiscreteDistribution& q_sim, double epsilon) {
  p_obs.validate();
  q_sim.validate();
  if (!(epsilon > 0.0))
    throw std::invalid_argument("kl_divergence: epsilon must be > 0");

  // align supports on the union; absent levels carry zero mass
  std::vector<double> p, qv;
  std::size_t i = 0, j = 0;
  const auto& ps = p_obs.support;
  const auto& qs = q_sim.support;
  while (i < ps.size() || j < qs.size()) {
    if (j >= qs.size() || (i < ps.size() && ps[i] < qs[j])) {
      p.push_back(p_obs.mass[i]);
      qv.push_back(0.0);
      ++i;
    } else if (i >= ps.size() || qs[j] < ps[i]) {
      p.push_back(0.0);
      qv.push_back(q_sim.mass[j]);
      ++j;
    } else {
      p.push_back(p_obs.mass[i]);
      qv.push_back(q_sim.mass[j]);
      ++i;
      ++j;
    }
  }

  double psum = 0.0, qsum = 0.0;
  for (const auto v : p) psum += v;
  for (const auto v : qv) qsum += v;
  const double qden = qsum + epsilon * static_cast<double>(qv.size());

  double kl = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const double pi = p[t] / psum;
    if (pi <= 0.0) continue;
    const double qi = (qv[t] + epsilon) / qden;
    kl += pi * std::log(pi / qi);
  }
  return std::max(kl, 0.0);
}

CharacteristicStats characteristic_stats(const Interactions& data,
                                         const StatsOptions& options,
                                         Rng& rng) {
  CharacteristicStats stats;
  stats.item_pop = popularity_distribution(data);
  stats.user_act = activity_distribution(data);
  stats.item_sim =
      similarity_distribution(data, SimilarityAxis::kItem, options.num_pairs,
                              options.min_ratings, options.bins, rng);
  stats.user_sim =
      similarity_distribution(data, SimilarityAxis::kUser, options.num_pairs,
                              options.min_ratings, options.bins, rng);
  return stats;
}

namespace {

nlohmann::json dist_to_json(const DiscreteDistribution& d) {
  return nlohmann::json{{"support", d.support}, {"mass", d.mass}};
}

DiscreteDistribution dist_from_json(const nlohmann::json& j) {
  DiscreteDistribution d;
  d.support = j.at("support").get<std::vector<double>>();
  d.mass = j.at("mass").get<std::vector<double>>();
  d.validate();
  return d;
}

}  // namespace

std::string stats_to_json(const CharacteristicStats& stats) {
  nlohmann::json j;
  j["version"] = 1;
  j["item_pop"] = dist_to_json(stats.item_pop);
  j["user_act"] = dist_to_json(stats.user_act);
  j["item_sim"] = dist_to_json(stats.item_sim);
  j["user_sim"] = dist_to_json(stats.user_sim);
  return j.dump(2) + "\n";
}

CharacteristicStats stats_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (!j.contains("version") || j.at("version").get<int>() != 1)
    throw std::invalid_argument("stats_from_json: unsupported schema version");
  CharacteristicStats stats;
  stats.item_pop = dist_from_json(j.at("item_pop"));
  stats.user_act = dist_from_json(j.at("user_act"));
  stats.item_sim = dist_from_json(j.at("item_sim"));
  stats.user_sim = dist_from_json(j.at("user_sim"));
  return stats;
}

}  // namespace recsim
