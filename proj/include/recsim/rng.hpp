#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace recsim {

// Seeded random source. All simulation randomness flows through this class so
// that a run is fully reproducible from a single 64-bit seed. The engine is
// mt19937_64 (output sequence fixed by the standard); every distribution on
// top of it is implemented here rather than with std:: distributions, whose
// algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; safe as a log/pow argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  // Standard normal via the Marsaglia polar method.
  double normal() {
    double x, y, s;
    do {
      x = uniform(-1.0, 1.0);
      y = uniform(-1.0, 1.0);
      s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    return x * std::sqrt(-2.0 * std::log(s) / s);
  }

  // Poisson draw. Knuth's product method below rate 10; above that, Hormann's
  // PTRD transformed-rejection sampler, which is exact and O(1) per draw.
  std::uint64_t poisson(double rate) {
    if (rate < 0.0 || !std::isfinite(rate))
      throw std::invalid_argument("poisson: rate must be finite and >= 0");
    if (rate == 0.0) return 0;
    if (rate < 10.0) {
      const double limit = std::exp(-rate);
      std::uint64_t k = 0;
      double p = 1.0;
      do {
        p *= uniform_pos();
        ++k;
      } while (p > limit);
      return k - 1;
    }
    return poisson_ptrd(rate);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0)
      return gamma(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Symmetric Dirichlet: k gamma(conc) draws, normalized.
  std::vector<double> dirichlet(double conc, std::size_t k) {
    if (k == 0) throw std::invalid_argument("dirichlet: k must be >= 1");
    std::vector<double> out(k);
    for (int attempt = 0; attempt < 64; ++attempt) {
      double sum = 0.0;
      for (auto& v : out) {
        v = gamma(conc);
        sum += v;
      }
      if (sum > 0.0 && std::isfinite(sum)) {
        for (auto& v : out) v /= sum;
        return out;
      }
      // all draws underflowed to zero (tiny conc); retry
    }
    throw std::runtime_error("dirichlet: draws underflowed repeatedly");
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::uint64_t poisson_ptrd(double mu) {
    const double smu = std::sqrt(mu);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mu = std::log(mu);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double k = kf;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * log_mu - mu - std::lgamma(k + 1.0))
        return static_cast<std::uint64_t>(kf);
    }
  }

  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed derivation scheme used everywhere: a child seed is a mix of the master
// seed, a stream index (replication number, evaluation counter, ...) and a
// module tag. Streams derived with distinct (index, tag) pairs are
// independent for practical purposes, which makes parallel replications safe.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the tag bytes
  for (const char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return splitmix64(splitmix64(master ^ h) ^ splitmix64(stream));
}

// Fisher-Yates over the first `count` slots; the prefix is a uniform sample
// without replacement once truncated.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t count, Rng& rng) {
  const std::size_t n = v.size();
  if (count > n) count = n;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(n - i));
    std::swap(v[i], v[j]);
  }
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  if (!v.empty()) partial_shuffle(v, v.size() - 1, rng);
}

}  // namespace recsim
