#pragma once

#include <cstdint>
#include <vector>

#include "recsim/preference.hpp"
#include "recsim/rng.hpp"

namespace recsim {

enum class TruncationMode { kClamp, kReject };

// Size law for observed profiles: Pareto(shape, scale 1) rounded half-up,
// truncated into [floor, limit].
struct ParetoParams {
  double shape;
  std::uint32_t floor;
  TruncationMode mode;

  explicit ParetoParams(double shape, std::uint32_t floor = 1,
                        TruncationMode mode = TruncationMode::kClamp);
};

// Observable consumption: one consumed subset per user of the parent's
// relevant set. The parent must outlive this object.
struct ObservationData {
  const PreferenceData* parent = nullptr;
  std::vector<std::vector<std::uint32_t>> consumed;  // sorted, non-empty

  std::size_t num_users() const { return consumed.size(); }
  std::size_t total_interactions() const;
};

// One profile-size draw in [max(floor,1), limit]. Rejection mode redraws
// whenever the rounded value exceeds the limit; clamp mode caps it.
std::uint32_t draw_profile_size(const ParetoParams& params, std::uint32_t limit,
                                Rng& rng);

// Picks each user's consumed items uniformly without replacement.
ObservationData sample_uniform(const PreferenceData& pref,
                               const ParetoParams& pareto, Rng& rng);

// Picks without replacement with probability proportional to true item
// popularity, renormalizing over the remaining items after every pick.
ObservationData sample_popular(const PreferenceData& pref,
                               const ParetoParams& pareto, Rng& rng);

}  // namespace recsim
