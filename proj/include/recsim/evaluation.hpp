#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recsim/observation.hpp"
#include "recsim/preference.hpp"
#include "recsim/rng.hpp"

namespace recsim {

// Per-user train/test partition of observed items. Users with a single
// observed item keep it in train and are excluded from metric aggregation.
struct SplitData {
  std::uint32_t item_universe = 0;
  std::vector<std::vector<std::uint32_t>> train;  // sorted
  std::vector<std::vector<std::uint32_t>> test;   // sorted
  std::vector<std::uint32_t> evaluable;           // users with |test| >= 1

  std::size_t num_users() const { return train.size(); }
};

SplitData split_observations(const ObservationData& obs, double fraction,
                             Rng& rng);

// Ranked recommendation lists, one per user; no duplicates, never contains
// the user's train items.
using RecList = std::vector<std::vector<std::uint32_t>>;

// Lists the user's relevant unseen items in random order and pads with
// random non-relevant items up to k.
RecList recommend_oracle(const PreferenceData& pref, const SplitData& split,
                         std::uint32_t k, Rng& rng);

// Ranks the whole item universe by training popularity (ties by ascending
// id), filters each user's train items, truncates to k. Deterministic.
RecList recommend_popular(const SplitData& split, std::uint32_t k);

// k distinct uniform draws outside the user's train set; shorter only when
// the universe runs out of candidates.
RecList recommend_random(const SplitData& split, std::uint32_t k, Rng& rng);

// Binary-relevance ranking metrics. `truth` must be sorted.
double precision_at_k(std::span<const std::uint32_t> list,
                      const std::vector<std::uint32_t>& truth, std::uint32_t k);
double recall_at_k(std::span<const std::uint32_t> list,
                   const std::vector<std::uint32_t>& truth, std::uint32_t k);
double mrr(std::span<const std::uint32_t> list,
           const std::vector<std::uint32_t>& truth);
double ndcg_at_k(std::span<const std::uint32_t> list,
                 const std::vector<std::uint32_t>& truth, std::uint32_t k);

enum class GroundTruth { kObserved, kTruth };

// The relevance set metrics are judged against: the held-out test items, or
// everything relevant that was not trained on.
std::vector<std::uint32_t> truth_set(const PreferenceData& pref,
                                     const SplitData& split, std::uint32_t user,
                                     GroundTruth kind);

inline constexpr std::array<const char*, 4> kMetricNames = {"P@50", "Recall",
                                                            "MRR", "nDCG"};

// Metric values for the evaluable users, in `evaluable` order; rows are
// P@50, Recall, MRR, nDCG.
struct UserMetrics {
  std::array<std::vector<double>, 4> values;
};

UserMetrics evaluate_per_user(const RecList& lists, const PreferenceData& pref,
                              const SplitData& split, GroundTruth kind,
                              std::uint32_t k);

// Unweighted mean over evaluable users, one value per metric.
std::array<double, 4> aggregate(const UserMetrics& metrics);

}  // namespace recsim
