#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>

#include "recsim/rng.hpp"

using namespace recsim;

TEST_CASE("identical seeds produce identical streams") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("derive_seed separates streams and tags") {
  const auto base = derive_seed(42, 0, "prefgen");
  CHECK(base == derive_seed(42, 0, "prefgen"));
  CHECK(base != derive_seed(42, 1, "prefgen"));
  CHECK(base != derive_seed(42, 0, "obsgen"));
  CHECK(base != derive_seed(43, 0, "prefgen"));
}

TEST_CASE("uniform_int covers its range uniformly") {
  Rng rng(7);
  std::array<int, 5> counts = {0, 0, 0, 0, 0};
  const int draws = 50000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_int(5)];
  for (const auto c : counts)
    CHECK(std::fabs(c / double(draws) - 0.2) < 0.01);
}

TEST_CASE("poisson matches mean and variance on both code paths") {
  Rng rng(11);
  for (const double rate : {0.5, 3.0, 25.0, 200.0}) {
    const int n = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(rate));
      sum += k;
      sq += k * k;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(rate).epsilon(0.03));
    CHECK(var == doctest::Approx(rate).epsilon(0.06));
  }
}

TEST_CASE("poisson zero rate is identically zero") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("gamma has the right first two moments") {
  Rng rng(5);
  for (const double shape : {0.3, 1.0, 4.5}) {
    const int n = 60000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape).epsilon(0.05));
    CHECK(var == doctest::Approx(shape).epsilon(0.1));
  }
}

TEST_CASE("dirichlet draws are simplex points") {
  Rng rng(9);
  for (const double conc : {0.1, 1.0, 50.0}) {
    const auto v = rng.dirichlet(conc, 20);
    double sum = 0.0;
    for (const auto x : v) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("partial_shuffle prefix is an unbiased sample") {
  Rng rng(13);
  std::array<int, 4> first_counts = {0, 0, 0, 0};
  const int trials = 40000;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> v = {0, 1, 2, 3};
    partial_shuffle(v, 1, rng);
    ++first_counts[v[0]];
  }
  for (const auto c : first_counts)
    CHECK(std::fabs(c / double(trials) - 0.25) < 0.01);
}
