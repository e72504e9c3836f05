#include <doctest.h>

#include <cmath>

#include "recsim/stats.hpp"

using namespace recsim;

namespace {

Interactions make_interactions(std::uint32_t num_items,
                               std::vector<std::vector<std::uint32_t>> profiles) {
  Interactions data;
  data.num_items = num_items;
  data.profiles = std::move(profiles);
  return data;
}

DiscreteDistribution dist(std::vector<double> support, std::vector<double> mass) {
  DiscreteDistribution d;
  d.support = std::move(support);
  d.mass = std::move(mass);
  d.validate();
  return d;
}

}  // namespace

TEST_CASE("popularity distribution counts levels") {
  // popularities: item0 = 3, item1 = 3, item2 = 1
  const auto data = make_interactions(
      3, {{0, 1}, {0, 1}, {0, 1, 2}});
  const auto d = popularity_distribution(data);
  REQUIRE(d.support == std::vector<double>{1.0, 3.0});
  CHECK(d.mass[0] == doctest::Approx(1.0 / 3.0));
  CHECK(d.mass[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("degenerate popularity: every item at the same level") {
  const auto data = make_interactions(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1},
                                          {0, 1}, {0, 1}, {0, 1}});
  const auto d = popularity_distribution(data);
  REQUIRE(d.support.size() == 1);
  CHECK(d.support[0] == 7.0);
  CHECK(d.mass[0] == 1.0);
}

TEST_CASE("activity distribution mirrors profile sizes") {
  const auto even = make_interactions(8, {{0, 1, 2, 3, 4}, {1, 2, 3, 4, 5}});
  const auto d1 = activity_distribution(even);
  REQUIRE(d1.support == std::vector<double>{5.0});
  CHECK(d1.mass[0] == 1.0);

  const auto mixed = make_interactions(8, {{0, 1}, {1, 2, 3, 4}});
  const auto d2 = activity_distribution(mixed);
  REQUIRE(d2.support == std::vector<double>{2.0, 4.0});
  CHECK(d2.mass[0] == 0.5);
  CHECK(d2.mass[1] == 0.5);
}

TEST_CASE("empty dataset is rejected") {
  const Interactions empty;
  CHECK_THROWS_AS(popularity_distribution(empty), std::invalid_argument);
  CHECK_THROWS_AS(activity_distribution(empty), std::invalid_argument);
}

TEST_CASE("identical profiles put all similarity mass at one") {
  const auto data =
      make_interactions(6, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
  Rng rng(1);
  const auto d = similarity_distribution(data, SimilarityAxis::kUser, 1000, 1,
                                         100, rng);
  CHECK(d.mass.back() == doctest::Approx(1.0));
}

TEST_CASE("disjoint profiles put all similarity mass at zero") {
  const auto data = make_interactions(6, {{0, 1}, {2, 3}, {4, 5}});
  Rng rng(2);
  const auto d = similarity_distribution(data, SimilarityAxis::kUser, 1000, 1,
                                         100, rng);
  CHECK(d.mass.front() == doctest::Approx(1.0));
}

TEST_CASE("half-overlap pair lands in the 0.5 bin") {
  // profiles {1,2} and {1,3}: cosine = 1 / sqrt(2 * 2) = 0.5
  const auto data = make_interactions(4, {{1, 2}, {1, 3}});
  Rng rng(3);
  const auto d = similarity_distribution(data, SimilarityAxis::kUser, 10, 1,
                                         100, rng);
  // 0.5 falls in bin 50, center 0.505
  CHECK(d.mass[50] == doctest::Approx(1.0));
}

TEST_CASE("similarity entity filter errors when too few qualify") {
  const auto data = make_interactions(4, {{0, 1}, {2}});
  Rng rng(4);
  CHECK_THROWS_WITH_AS(
      similarity_distribution(data, SimilarityAxis::kUser, 10, 5, 100, rng),
      doctest::Contains("at least 5"), std::invalid_argument);
}

TEST_CASE("item axis inverts the matrix") {
  // item 0 in users {0,1}, item 1 in users {0,1}: cosine 1
  const auto data = make_interactions(2, {{0, 1}, {0, 1}});
  Rng rng(5);
  const auto d =
      similarity_distribution(data, SimilarityAxis::kItem, 10, 2, 10, rng);
  CHECK(d.mass.back() == doctest::Approx(1.0));
}

TEST_CASE("kl divergence of a distribution with itself is zero") {
  const auto p = dist({1, 2, 5}, {0.2, 0.3, 0.5});
  CHECK(kl_divergence(p, p) <= 1e-9);
}

TEST_CASE("kl divergence two-point hand value") {
  const auto p = dist({0, 1}, {0.5, 0.5});
  const auto q = dist({0, 1}, {0.25, 0.75});
  // 0.5 ln 2 + 0.5 ln(2/3) = 0.14384
  CHECK(kl_divergence(p, q) == doctest::Approx(0.14384).epsilon(1e-4));
}

TEST_CASE("unmatched mass is finite and grows as epsilon shrinks") {
  const auto p = dist({0, 1}, {0.5, 0.5});
  const auto q = dist({0}, {1.0});
  const double k1 = kl_divergence(p, q, 1e-6);
  const double k2 = kl_divergence(p, q, 1e-10);
  const double k3 = kl_divergence(p, q, 1e-14);
  CHECK(std::isfinite(k3));
  CHECK(k1 < k2);
  CHECK(k2 < k3);
}

TEST_CASE("kl divergence is non-negative on random distribution pairs") {
  Rng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.uniform_int(20);
    std::vector<double> support(n);
    for (std::size_t i = 0; i < n; ++i) support[i] = static_cast<double>(i);
    const auto pm = rng.dirichlet(0.5, n);
    const auto qm = rng.dirichlet(0.5, n);
    const auto p = dist(support, pm);
    const auto q = dist(support, qm);
    CHECK(kl_divergence(p, q) >= 0.0);
  }
}

TEST_CASE("popularity and activity recomputation is bit-identical") {
  Rng gen(7);
  const auto pref = generate_ibp(IbpParams(8.0, 0.5, 1.0), 300, gen);
  const auto data = to_interactions(pref);
  const auto a = popularity_distribution(data);
  const auto b = popularity_distribution(data);
  CHECK(a.support == b.support);
  CHECK(a.mass == b.mass);
}

TEST_CASE("similarity sampling: same seed identical, cross-seed K-L small") {
  Rng gen(8);
  const auto pref = generate_ibp(IbpParams(20.0, 0.4, 1.0), 1200, gen);
  REQUIRE(pref.num_users() >= 1000);
  const auto data = to_interactions(pref);

  Rng r1(42), r2(42), r3(43);
  const auto a = similarity_distribution(data, SimilarityAxis::kUser, 50000, 5,
                                         100, r1);
  const auto b = similarity_distribution(data, SimilarityAxis::kUser, 50000, 5,
                                         100, r2);
  CHECK(a.support == b.support);
  CHECK(a.mass == b.mass);

  const auto c = similarity_distribution(data, SimilarityAxis::kUser, 50000, 5,
                                         100, r3);
  CHECK(kl_divergence(a, c) < 0.01);
}

TEST_CASE("stats serialize and parse back") {
  Rng gen(9);
  const auto pref = generate_ibp(IbpParams(10.0, 0.3, 1.0), 200, gen);
  Rng rng(10);
  const auto stats =
      characteristic_stats(to_interactions(pref), {5000, 2, 50}, rng);
  const auto text = stats_to_json(stats);
  const auto parsed = stats_from_json(text);
  CHECK(parsed.item_pop.support == stats.item_pop.support);
  CHECK(parsed.item_pop.mass == stats.item_pop.mass);
  CHECK(parsed.user_sim.mass == stats.user_sim.mass);
  // identical bytes on re-serialization
  CHECK(stats_to_json(parsed) == text);
}

TEST_CASE("distribution validation catches broken inputs") {
  DiscreteDistribution bad;
  bad.support = {1.0, 1.0};
  bad.mass = {0.5, 0.5};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.support = {1.0, 2.0};
  bad.mass = {0.9, 0.3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
