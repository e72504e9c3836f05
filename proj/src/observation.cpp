#include "recsim/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace recsim {

ParetoParams::ParetoParams(double shape, std::uint32_t floor,
                           TruncationMode mode)
    : shape(shape), floor(floor), mode(mode) {
  if (!(shape > 0.0))
    throw std::invalid_argument("ParetoParams: shape must be > 0");
  if (floor < 1) throw std::invalid_argument("ParetoParams: floor must be >= 1");
}

std::size_t ObservationData::total_interactions() const {
  std::size_t total = 0;
  for (const auto& items : consumed) total += items.size();
  return total;
}

std::uint32_t draw_profile_size(const ParetoParams& params, std::uint32_t limit,
                                Rng& rng) {
  if (limit < 1)
    throw std::invalid_argument("draw_profile_size: limit must be >= 1");
  if (params.floor > limit)
    throw std::invalid_argument("draw_profile_size: floor " +
                                std::to_string(params.floor) +
                                " exceeds limit " + std::to_string(limit));
  const double inv_shape = 1.0 / params.shape;
  for (;;) {
    const double x = std::pow(rng.uniform_pos(), -inv_shape);
    // round half-up, saturating well above the limit to dodge overflow
    double n = std::floor(x + 0.5);
    if (n < params.floor) n = params.floor;
    if (n <= static_cast<double>(limit)) return static_cast<std::uint32_t>(n);
    if (params.mode == TruncationMode::kClamp) return limit;
    // reject: fall through and redraw
  }
}

namespace {

std::vector<std::uint32_t> pick_uniform(const std::vector<std::uint32_t>& pool,
                                        std::uint32_t count, Rng& rng) {
  std::vector<std::uint32_t> items = pool;
  partial_shuffle(items, count, rng);
  items.resize(count);
  std::sort(items.begin(), items.end());
  return items;
}

std::vector<std::uint32_t> pick_weighted(
    const std::vector<std::uint32_t>& pool,
    const std::vector<std::uint32_t>& weights, std::uint32_t count, Rng& rng) {
  std::vector<std::uint32_t> items = pool;
  std::vector<double> w(items.size());
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    w[i] = static_cast<double>(weights[items[i]]);
    total += w[i];
  }
  if (total <= 0.0)
    throw std::runtime_error("sample_popular: zero total weight");
  std::vector<std::uint32_t> out;
  out.reserve(count);
  std::size_t remaining = items.size();
  for (std::uint32_t picked = 0; picked < count; ++picked) {
    double r = rng.uniform() * total;
    std::size_t chosen = remaining - 1;
    for (std::size_t i = 0; i < remaining; ++i) {
      r -= w[i];
      if (r < 0.0) {
        chosen = i;
        break;
      }
    }
    out.push_back(items[chosen]);
    total -= w[chosen];
    --remaining;
    items[chosen] = items[remaining];
    w[chosen] = w[remaining];
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename PickFn>
ObservationData sample_impl(const PreferenceData& pref,
                            const ParetoParams& pareto, Rng& rng,
                            PickFn&& pick) {
  if (pref.num_users() == 0)
    throw std::invalid_argument("observation sampling: empty preference data");
  ObservationData obs;
  obs.parent = &pref;
  obs.consumed.reserve(pref.num_users());
  for (const auto& relevant : pref.relevant) {
    const auto limit = static_cast<std::uint32_t>(relevant.size());
    // users with fewer relevant items than the configured floor consume
    // everything they have
    const ParetoParams effective(pareto.shape, std::min(pareto.floor, limit),
                                 pareto.mode);
    const std::uint32_t size = draw_profile_size(effective, limit, rng);
    obs.consumed.push_back(pick(relevant, size));
  }
  return obs;
}

}  // namespace

ObservationData sample_uniform(const PreferenceData& pref,
                               const ParetoParams& pareto, Rng& rng) {
  return sample_impl(pref, pareto, rng,
                     [&rng](const std::vector<std::uint32_t>& pool,
                            std::uint32_t count) {
                       return pick_uniform(pool, count, rng);
                     });
}

ObservationData sample_popular(const PreferenceData& pref,
                               const ParetoParams& pareto, Rng& rng) {
  return sample_impl(pref, pareto, rng,
                     [&pref, &rng](const std::vector<std::uint32_t>& pool,
                                   std::uint32_t count) {
                       return pick_weighted(pool, pref.item_popularity, count,
                                            rng);
                     });
}

}  // namespace recsim
