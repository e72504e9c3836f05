#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "recsim/observation.hpp"
#include "recsim/preference.hpp"
#include "recsim/rng.hpp"

namespace recsim {

// Canonical binary interaction container consumed by the statistics code.
// One sorted item-id list per user; num_items bounds the id space.
struct Interactions {
  std::uint32_t num_items = 0;
  std::vector<std::vector<std::uint32_t>> profiles;

  std::size_t num_users() const { return profiles.size(); }
  std::vector<std::uint32_t> item_counts() const;
};

Interactions to_interactions(const ObservationData& obs);
Interactions to_interactions(const PreferenceData& pref);

// Discrete probability distribution over an increasing support of levels or
// bin centers. Zero masses are allowed.
struct DiscreteDistribution {
  std::vector<double> support;
  std::vector<double> mass;

  void validate() const;  // throws std::invalid_argument on violation
};

// The four calibration statistics of a dataset.
struct CharacteristicStats {
  DiscreteDistribution item_pop;
  DiscreteDistribution user_act;
  DiscreteDistribution item_sim;
  DiscreteDistribution user_sim;
};

inline constexpr std::array<const char*, 4> kStatNames = {
    "item_pop", "user_act", "item_sim", "user_sim"};

// Frequency of each item-popularity level among items with at least one
// interaction (unobserved items do not exist in an observed dataset).
DiscreteDistribution popularity_distribution(const Interactions& data);

// Frequency of each user profile size.
DiscreteDistribution activity_distribution(const Interactions& data);

enum class SimilarityAxis { kItem, kUser };

// Cosine-similarity distribution over sampled distinct entity pairs,
// histogrammed into equal-width bins on [0, 1]. Entities with fewer than
// min_ratings interactions are excluded; if the qualifying pair count is at
// most num_pairs, all pairs are enumerated instead of sampled.
DiscreteDistribution similarity_distribution(const Interactions& data,
                                             SimilarityAxis axis,
                                             std::size_t num_pairs,
                                             std::uint32_t min_ratings,
                                             std::uint32_t bins, Rng& rng);

// D_KL(p_obs || q_sim) in nats. Supports are aligned on their union, the
// simulated side gets additive epsilon smoothing, both sides renormalized.
double kl_divergence(const DiscreteDistribution& p_obs,
                     const DiscreteDistribution& q_sim,
                     double epsilon = 1e-10);

struct StatsOptions {
  std::size_t num_pairs = 1'000'000;
  std::uint32_t min_ratings = 5;
  std::uint32_t bins = 100;
};

CharacteristicStats characteristic_stats(const Interactions& data,
                                         const StatsOptions& options, Rng& rng);

// Versioned JSON document with the four named histograms.
std::string stats_to_json(const CharacteristicStats& stats);
CharacteristicStats stats_from_json(const std::string& text);

}  // namespace recsim
