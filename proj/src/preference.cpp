#include "recsim/preference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace recsim {

std::size_t PreferenceData::total_interactions() const {
  std::size_t total = 0;
  for (const auto& items : relevant) total += items.size();
  return total;
}

PreferenceData PreferenceData::from_profiles(
    std::uint32_t item_universe,
    std::vector<std::vector<std::uint32_t>> profiles) {
  PreferenceData data;
  data.item_universe = item_universe;
  data.item_popularity.assign(item_universe, 0);
  data.relevant.reserve(profiles.size());
  for (auto& items : profiles) {
    if (items.empty()) continue;  // unobservable user, dropped
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    if (items.back() >= item_universe)
      throw std::invalid_argument("PreferenceData: item id " +
                                  std::to_string(items.back()) +
                                  " outside universe of size " +
                                  std::to_string(item_universe));
    for (const auto i : items) ++data.item_popularity[i];
    data.relevant.push_back(std::move(items));
  }
  return data;
}

IbpParams::IbpParams(double alpha, double sigma, double c)
    : alpha(alpha), sigma(sigma), c(c) {
  // alpha = 0 is admitted as the degenerate zero-rate process (empty output)
  if (!(alpha >= 0.0))
    throw std::invalid_argument("IbpParams: alpha must be >= 0");
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw std::invalid_argument("IbpParams: sigma must be in [0, 1)");
  if (!(c > -sigma))
    throw std::invalid_argument("IbpParams: c must be > -sigma");
}

namespace {

// log of the fresh-item Poisson rate for the user following `n` others:
//   alpha * G(1+c) G(n+c+sigma) / (G(n+1+c) G(c+sigma))
double ibp_log_fresh_rate(const IbpParams& p, double n) {
  return std::log(p.alpha) + std::lgamma(1.0 + p.c) +
         std::lgamma(n + p.c + p.sigma) - std::lgamma(n + 1.0 + p.c) -
         std::lgamma(p.c + p.sigma);
}

constexpr double kMaxLogRate = 700.0;  // exp() overflows just past this

}  // namespace

std::vector<std::uint32_t> ibp_next_user(IbpState& state, const IbpParams& params,
                                         Rng& rng) {
  std::vector<std::uint32_t> items;
  const double n = static_cast<double>(state.users_processed);
  const double denom = n + params.c;
  for (std::uint32_t i = 0; i < state.like_counts.size(); ++i) {
    const double p = (state.like_counts[i] - params.sigma) / denom;
    if (rng.bernoulli(p)) {
      items.push_back(i);
      ++state.like_counts[i];
    }
  }
  double fresh_rate = 0.0;
  if (params.alpha > 0.0) {
    const double log_rate = ibp_log_fresh_rate(params, n);
    if (log_rate > kMaxLogRate)
      throw std::overflow_error(
          "ibp_next_user: fresh-item rate overflows at user index " +
          std::to_string(state.users_processed));
    fresh_rate = std::exp(log_rate);
  }
  const std::uint64_t fresh = rng.poisson(fresh_rate);
  for (std::uint64_t j = 0; j < fresh; ++j) {
    items.push_back(state.next_item_id++);
    state.like_counts.push_back(1);
  }
  ++state.users_processed;
  return items;
}

double ibp_expected_items(const IbpParams& params, std::uint32_t num_users) {
  const double N = num_users;
  const double c = params.c;
  const double s = params.sigma;
  if (s == 0.0) {
    // rate_n = alpha * c / (n + c); harmonic-like sum
    double sum = 0.0;
    for (std::uint32_t n = 0; n < num_users; ++n) sum += c / (n + c);
    return params.alpha * sum;
  }
  // sum_{n<N} G(n+c+s)/G(n+1+c) telescopes to (G(N+c+s)/G(N+c) - G(c+s)/G(c))/s
  const double head = std::exp(std::lgamma(N + c + s) - std::lgamma(N + c));
  const double tail = std::exp(std::lgamma(c + s) - std::lgamma(c));
  const double sum = (head - tail) / s;
  return params.alpha * std::exp(std::lgamma(1.0 + c) - std::lgamma(c + s)) * sum;
}

PreferenceData generate_ibp(const IbpParams& params, std::uint32_t num_users,
                            Rng& rng) {
  if (num_users < 1)
    throw std::invalid_argument("generate_ibp: num_users must be >= 1");
  IbpState state;
  std::vector<std::vector<std::uint32_t>> profiles;
  profiles.reserve(num_users);
  for (std::uint32_t u = 0; u < num_users; ++u)
    profiles.push_back(ibp_next_user(state, params, rng));
  return PreferenceData::from_profiles(state.next_item_id, std::move(profiles));
}

LdaParams::LdaParams(double a, double b, std::uint32_t k, double lambda,
                     std::uint32_t num_items)
    : a(a), b(b), k(k), lambda(lambda), num_items(num_items) {
  if (!(a > 0.0)) throw std::invalid_argument("LdaParams: a must be > 0");
  if (!(b > 0.0)) throw std::invalid_argument("LdaParams: b must be > 0");
  if (k < 1) throw std::invalid_argument("LdaParams: k must be >= 1");
  if (!(lambda > 0.0))
    throw std::invalid_argument("LdaParams: lambda must be > 0");
  if (num_items < 1)
    throw std::invalid_argument("LdaParams: num_items must be >= 1");
}

namespace {

// Prefix sums for inverse-CDF categorical draws; last entry pinned to 1.
std::vector<double> to_cdf(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

std::size_t draw_categorical(const std::vector<double>& cdf, Rng& rng) {
  const double r = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
  return std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
}

}  // namespace

PreferenceData generate_lda(const LdaParams& params, std::uint32_t num_users,
                            Rng& rng, LdaDiagnostics* diag) {
  if (num_users < 1)
    throw std::invalid_argument("generate_lda: num_users must be >= 1");

  std::vector<std::vector<double>> phi_cdf(params.k);
  for (std::uint32_t f = 0; f < params.k; ++f) {
    auto phi = rng.dirichlet(params.b, params.num_items);
    if (diag) diag->latent.phi.push_back(phi);
    phi_cdf[f] = to_cdf(phi);
  }
  if (diag) diag->item_draw_counts.assign(params.num_items, 0);

  std::vector<std::vector<std::uint32_t>> profiles(num_users);
  for (std::uint32_t u = 0; u < num_users; ++u) {
    auto theta = rng.dirichlet(params.a, params.k);
    if (diag) diag->latent.theta.push_back(theta);
    const auto theta_cdf = to_cdf(theta);
    const std::uint64_t draws = rng.poisson(params.lambda);
    if (diag) diag->pre_dedup_draws += draws;
    auto& prof = profiles[u];
    prof.reserve(draws);
    for (std::uint64_t d = 0; d < draws; ++d) {
      const std::size_t feature = draw_categorical(theta_cdf, rng);
      const std::size_t item = draw_categorical(phi_cdf[feature], rng);
      prof.push_back(static_cast<std::uint32_t>(item));
      if (diag) ++diag->item_draw_counts[item];
    }
  }
  return PreferenceData::from_profiles(params.num_items, std::move(profiles));
}

}  // namespace recsim
