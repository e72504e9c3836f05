#pragma once

#include <cstdint>
#include <vector>

#include "recsim/rng.hpp"

namespace recsim {

// Euler-Mascheroni constant; enters the expected item count of the
// one-parameter process (sigma = 0, c = 1): roughly alpha * (ln U + gamma).
inline constexpr double kEulerGamma = 0.57721566490153286;

// Complete binary truth: one relevant-item set per user plus the derived
// per-item audience counts. Item ids are dense in [0, item_universe).
struct PreferenceData {
  std::uint32_t item_universe = 0;
  std::vector<std::vector<std::uint32_t>> relevant;   // sorted, unique, non-empty
  std::vector<std::uint32_t> item_popularity;         // |audience of item i|

  std::size_t num_users() const { return relevant.size(); }
  std::size_t total_interactions() const;

  // Normalizes raw profiles into a valid PreferenceData: sorts and dedups
  // each profile, drops users with empty sets, rebuilds the popularity index.
  // Throws if any item id is >= item_universe.
  static PreferenceData from_profiles(
      std::uint32_t item_universe,
      std::vector<std::vector<std::uint32_t>> profiles);
};

// Three-parameter preferential-attachment process parameters.
struct IbpParams {
  double alpha;  // density
  double sigma;  // power-law strength, in [0, 1)
  double c;      // new-vs-old balance, > -sigma

  IbpParams(double alpha, double sigma, double c);
};

// Running state of the sequential process. like_counts[i] is the number of
// users so far that like item i; the invariant
//   sum(like_counts) == sum over processed users of |profile|
// holds after every step.
struct IbpState {
  std::uint64_t users_processed = 0;
  std::vector<std::uint32_t> like_counts;
  std::uint32_t next_item_id = 0;
};

// Advances the process by one user and returns that user's item set (sorted;
// may be empty). Throws std::overflow_error naming the user index if the
// fresh-item Poisson rate is not representable. The rate is evaluated with
// log-gamma differences, so this only triggers for absurd parameter values.
std::vector<std::uint32_t> ibp_next_user(IbpState& state, const IbpParams& params,
                                         Rng& rng);

// Exact expectation of the number of distinct items after num_users steps.
// Closed form of the summed fresh-item rates (telescoping gamma ratios).
double ibp_expected_items(const IbpParams& params, std::uint32_t num_users);

PreferenceData generate_ibp(const IbpParams& params, std::uint32_t num_users,
                            Rng& rng);

// Symmetric latent-feature model parameters.
struct LdaParams {
  double a;                 // user-feature concentration
  double b;                 // feature-item concentration
  std::uint32_t k;          // latent features
  double lambda;            // mean pre-dedup draws per user
  std::uint32_t num_items;  // fixed item universe

  LdaParams(double a, double b, std::uint32_t k, double lambda,
            std::uint32_t num_items);
};

// Latent draws of one generation run: k feature-item simplex vectors and one
// feature mixture per generated user (before empty users are dropped).
struct LdaLatentState {
  std::vector<std::vector<double>> phi;    // k x num_items
  std::vector<std::vector<double>> theta;  // num_users x k
};

struct LdaDiagnostics {
  LdaLatentState latent;
  std::uint64_t pre_dedup_draws = 0;
  std::vector<std::uint64_t> item_draw_counts;  // pre-dedup, per item
};

PreferenceData generate_lda(const LdaParams& params, std::uint32_t num_users,
                            Rng& rng, LdaDiagnostics* diag = nullptr);

}  // namespace recsim
