#pragma once

#include <cstddef>
#include <vector>

namespace recsim {

// Gaussian-process regressor with a Matern-5/2 kernel, used as the surrogate
// in sequential model-based minimization. Inputs are expected in the unit
// cube; targets are standardized internally. Kernel length scale and noise
// level are selected by maximizing the log marginal likelihood over a fixed
// grid, which keeps fitting deterministic.
class GaussianProcess {
 public:
  struct Prediction {
    double mean;
    double sd;
  };

  void fit(const std::vector<std::vector<double>>& x,
           const std::vector<double>& y);

  Prediction predict(const std::vector<double>& x) const;

  double length_scale() const { return length_scale_; }
  double noise() const { return noise_; }

 private:
  std::vector<std::vector<double>> x_;
  std::vector<double> chol_;   // lower Cholesky factor of K, row-major
  std::vector<double> alpha_;  // K^-1 z
  double y_mean_ = 0.0;
  double y_sd_ = 1.0;
  double length_scale_ = 1.0;
  double noise_ = 1e-6;
  std::size_t n_ = 0;
};

}  // namespace recsim
