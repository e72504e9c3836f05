#include "recsim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace recsim {

SplitData split_observations(const ObservationData& obs, double fraction,
                             Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split_observations: fraction must be in (0,1)");
  if (!obs.parent)
    throw std::invalid_argument("split_observations: observation has no parent");
  SplitData split;
  split.item_universe = obs.parent->item_universe;
  split.train.resize(obs.num_users());
  split.test.resize(obs.num_users());
  for (std::size_t u = 0; u < obs.num_users(); ++u) {
    const auto& items = obs.consumed[u];
    if (items.size() < 2) {
      split.train[u] = items;
      continue;  // not evaluable, all items stay in train
    }
    const auto n = items.size();
    const auto test_size = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(fraction * static_cast<double>(n))));
    std::vector<std::uint32_t> shuffled = items;
    partial_shuffle(shuffled, test_size, rng);
    split.test[u].assign(shuffled.begin(), shuffled.begin() + test_size);
    split.train[u].assign(shuffled.begin() + test_size, shuffled.end());
    std::sort(split.test[u].begin(), split.test[u].end());
    std::sort(split.train[u].begin(), split.train[u].end());
    split.evaluable.push_back(static_cast<std::uint32_t>(u));
  }
  return split;
}

namespace {

bool contains(const std::vector<std::uint32_t>& sorted, std::uint32_t value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

// a \ b for sorted vectors
std::vector<std::uint32_t> set_difference(const std::vector<std::uint32_t>& a,
                                          const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

// `count` distinct uniform draws from [0, universe) excluding two sorted sets;
// falls back to enumerating the complement when it is small.
void append_random_outside(std::vector<std::uint32_t>& out, std::size_t count,
                           std::uint32_t universe,
                           const std::vector<std::uint32_t>& excluded,
                           Rng& rng) {
  const std::size_t available = universe - excluded.size();
  if (count >= available) {
    // take the whole complement, shuffled
    std::vector<std::uint32_t> rest;
    rest.reserve(available);
    std::size_t j = 0;
    for (std::uint32_t i = 0; i < universe; ++i) {
      if (j < excluded.size() && excluded[j] == i) {
        ++j;
        continue;
      }
      rest.push_back(i);
    }
    shuffle(rest, rng);
    out.insert(out.end(), rest.begin(), rest.end());
    return;
  }
  std::unordered_set<std::uint32_t> used;
  used.reserve(count * 2);
  while (used.size() < count) {
    const auto candidate = static_cast<std::uint32_t>(rng.uniform_int(universe));
    if (contains(excluded, candidate)) continue;
    if (used.insert(candidate).second) out.push_back(candidate);
  }
}

}  // namespace

RecList recommend_oracle(const PreferenceData& pref, const SplitData& split,
                         std::uint32_t k, Rng& rng) {
  if (pref.num_users() != split.num_users())
    throw std::invalid_argument("recommend_oracle: split/pref size mismatch");
  RecList lists(split.num_users());
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    auto unseen = set_difference(pref.relevant[u], split.train[u]);
    shuffle(unseen, rng);
    if (unseen.size() > k) unseen.resize(k);
    if (unseen.size() < k) {
      // pad with non-relevant items; train is a subset of relevant, so
      // excluding the relevant set covers both
      append_random_outside(unseen, k - unseen.size(), split.item_universe,
                            pref.relevant[u], rng);
      if (unseen.size() > k) unseen.resize(k);
    }
    lists[u] = std::move(unseen);
  }
  return lists;
}

RecList recommend_popular(const SplitData& split, std::uint32_t k) {
  std::vector<std::uint32_t> counts(split.item_universe, 0);
  for (const auto& items : split.train)
    for (const auto i : items) ++counts[i];
  std::vector<std::uint32_t> order(split.item_universe);
  for (std::uint32_t i = 0; i < split.item_universe; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&counts](std::uint32_t a, std::uint32_t b) {
                     if (counts[a] != counts[b]) return counts[a] > counts[b];
                     return a < b;
                   });
  RecList lists(split.num_users());
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    auto& list = lists[u];
    list.reserve(k);
    for (const auto item : order) {
      if (contains(split.train[u], item)) continue;
      list.push_back(item);
      if (list.size() == k) break;
    }
  }
  return lists;
}

RecList recommend_random(const SplitData& split, std::uint32_t k, Rng& rng) {
  RecList lists(split.num_users());
  for (std::size_t u = 0; u < split.num_users(); ++u) {
    lists[u].reserve(k);
    append_random_outside(lists[u], k, split.item_universe, split.train[u],
                          rng);
    if (lists[u].size() > k) lists[u].resize(k);
  }
  return lists;
}

double precision_at_k(std::span<const std::uint32_t> list,
                      const std::vector<std::uint32_t>& truth,
                      std::uint32_t k) {
  if (k == 0) throw std::invalid_argument("precision_at_k: k must be > 0");
  std::size_t hits = 0;
  const std::size_t depth = std::min<std::size_t>(list.size(), k);
  for (std::size_t r = 0; r < depth; ++r)
    if (contains(truth, list[r])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at_k(std::span<const std::uint32_t> list,
                   const std::vector<std::uint32_t>& truth, std::uint32_t k) {
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  const std::size_t depth = std::min<std::size_t>(list.size(), k);
  for (std::size_t r = 0; r < depth; ++r)
    if (contains(truth, list[r])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mrr(std::span<const std::uint32_t> list,
           const std::vector<std::uint32_t>& truth) {
  for (std::size_t r = 0; r < list.size(); ++r)
    if (contains(truth, list[r])) return 1.0 / static_cast<double>(r + 1);
  return 0.0;
}

double ndcg_at_k(std::span<const std::uint32_t> list,
                 const std::vector<std::uint32_t>& truth, std::uint32_t k) {
  if (truth.empty()) return 0.0;
  double dcg = 0.0;
  const std::size_t depth = std::min<std::size_t>(list.size(), k);
  for (std::size_t r = 0; r < depth; ++r)
    if (contains(truth, list[r])) dcg += 1.0 / std::log2(r + 2.0);
  const std::size_t ideal = std::min<std::size_t>(truth.size(), k);
  double idcg = 0.0;
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(r + 2.0);
  return dcg / idcg;
}

std::vector<std::uint32_t> truth_set(const PreferenceData& pref,
                                     const SplitData& split, std::uint32_t user,
                                     GroundTruth kind) {
  if (kind == GroundTruth::kObserved) return split.test[user];
  return set_difference(pref.relevant[user], split.train[user]);
}

UserMetrics evaluate_per_user(const RecList& lists, const PreferenceData& pref,
                              const SplitData& split, GroundTruth kind,
                              std::uint32_t k) {
  UserMetrics metrics;
  for (auto& v : metrics.values) v.reserve(split.evaluable.size());
  for (const auto u : split.evaluable) {
    const auto truth = truth_set(pref, split, u, kind);
    const auto& list = lists[u];
    metrics.values[0].push_back(precision_at_k(list, truth, k));
    metrics.values[1].push_back(recall_at_k(list, truth, k));
    metrics.values[2].push_back(mrr(list, truth));
    metrics.values[3].push_back(ndcg_at_k(list, truth, k));
  }
  return metrics;
}

std::array<double, 4> aggregate(const UserMetrics& metrics) {
  std::array<double, 4> out = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t m = 0; m < 4; ++m) {
    const auto& v = metrics.values[m];
    if (v.empty()) continue;
    double sum = 0.0;
    for (const auto x : v) sum += x;
    out[m] = sum / static_cast<double>(v.size());
  }
  return out;
}

}  // namespace recsim
