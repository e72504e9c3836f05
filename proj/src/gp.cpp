#include "recsim/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace recsim {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double matern52(double r, double ls) {
  const double t = std::sqrt(5.0) * r / ls;
  return (1.0 + t + t * t / 3.0) * std::exp(-t);
}

// In-place Cholesky of a row-major symmetric matrix; returns false if the
// matrix is not positive definite at this jitter level.
bool cholesky(std::vector<double>& m, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = m[i * n + j];
      for (std::size_t k = 0; k < j; ++k) sum -= m[i * n + k] * m[j * n + k];
      if (i == j) {
        if (sum <= 0.0) return false;
        m[i * n + i] = std::sqrt(sum);
      } else {
        m[i * n + j] = sum / m[j * n + j];
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
  }
  return true;
}

void solve_lower(const std::vector<double>& l, std::size_t n,
                 std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * b[k];
    b[i] = sum / l[i * n + i];
  }
}

void solve_upper_from_lower(const std::vector<double>& l, std::size_t n,
                            std::vector<double>& b) {
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) sum -= l[k * n + ii] * b[k];
    b[ii] = sum / l[ii * n + ii];
  }
}

constexpr double kLengthScales[] = {0.05, 0.08, 0.13, 0.2,
                                    0.32, 0.5,  0.8,  1.25, 2.0};
constexpr double kNoiseLevels[] = {1e-8, 1e-6, 1e-4, 1e-2};
constexpr double kTwoPi = 6.283185307179586;

}  // namespace

void GaussianProcess::fit(const std::vector<std::vector<double>>& x,
                          const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("GaussianProcess::fit: bad training data");
  n_ = x.size();
  x_ = x;

  y_mean_ = 0.0;
  for (const auto v : y) y_mean_ += v;
  y_mean_ /= static_cast<double>(n_);
  double var = 0.0;
  for (const auto v : y) var += (v - y_mean_) * (v - y_mean_);
  y_sd_ = std::sqrt(var / static_cast<double>(n_));
  if (y_sd_ < 1e-12) y_sd_ = 1.0;  // constant targets
  std::vector<double> z(n_);
  for (std::size_t i = 0; i < n_; ++i) z[i] = (y[i] - y_mean_) / y_sd_;

  std::vector<double> dist(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < i; ++j)
      dist[i * n_ + j] = std::sqrt(sq_distance(x_[i], x_[j]));

  double best_lml = -std::numeric_limits<double>::infinity();
  std::vector<double> k(n_ * n_), work(n_ * n_);
  for (const double ls : kLengthScales) {
    for (const double noise : kNoiseLevels) {
      for (std::size_t i = 0; i < n_; ++i) {
        k[i * n_ + i] = 1.0 + noise;
        for (std::size_t j = 0; j < i; ++j) {
          const double v = matern52(dist[i * n_ + j], ls);
          k[i * n_ + j] = v;
          k[j * n_ + i] = v;
        }
      }
      work = k;
      double jitter = 0.0;
      bool ok = cholesky(work, n_);
      while (!ok && jitter < 1e-2) {
        jitter = jitter == 0.0 ? 1e-10 : jitter * 100.0;
        work = k;
        for (std::size_t i = 0; i < n_; ++i) work[i * n_ + i] += jitter;
        ok = cholesky(work, n_);
      }
      if (!ok) continue;

      std::vector<double> a = z;
      solve_lower(work, n_, a);
      double quad = 0.0, logdet = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        quad += a[i] * a[i];
        logdet += std::log(work[i * n_ + i]);
      }
      const double lml = -0.5 * quad - logdet -
                         0.5 * static_cast<double>(n_) * std::log(kTwoPi);
      if (lml > best_lml) {
        best_lml = lml;
        length_scale_ = ls;
        noise_ = noise + jitter;
        chol_ = work;
        solve_upper_from_lower(work, n_, a);
        alpha_ = a;
      }
    }
  }
  if (!std::isfinite(best_lml))
    throw std::runtime_error("GaussianProcess::fit: no usable kernel fit");
}

GaussianProcess::Prediction GaussianProcess::predict(
    const std::vector<double>& x) const {
  std::vector<double> ks(n_);
  for (std::size_t i = 0; i < n_; ++i)
    ks[i] = matern52(std::sqrt(sq_distance(x, x_[i])), length_scale_);
  double mean = 0.0;
  for (std::size_t i = 0; i < n_; ++i) mean += ks[i] * alpha_[i];
  std::vector<double> v = ks;
  solve_lower(chol_, n_, v);
  double reduction = 0.0;
  for (const auto t : v) reduction += t * t;
  const double var = std::max(1.0 - reduction, 1e-12);
  return {mean * y_sd_ + y_mean_, std::sqrt(var) * y_sd_};
}

}  // namespace recsim
