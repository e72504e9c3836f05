#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "recsim/dataset.hpp"

using namespace recsim;
namespace fs = std::filesystem;

namespace {

const std::string kFixture =
    std::string(RECSIM_FIXTURE_DIR) + "/ml1m_sample.dat";
const std::string kCsvFixture =
    std::string(RECSIM_FIXTURE_DIR) + "/interactions_sample.csv";

fs::path write_temp(const std::string& name, const std::string& content) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream f(path);
  f << content;
  return path;
}

}  // namespace

TEST_CASE("movielens fixture loads with hand-counted totals") {
  // 100 lines, 3 of them duplicate pairs
  const auto data = load_movielens(kFixture);
  CHECK(data.num_users() == 8);
  CHECK(data.num_items() == 30);
  CHECK(data.num_pairs() == 97);
  CHECK(data.format == "ml1m");
  // dense remap is ascending by original id
  CHECK(data.user_ids.front() == 1);
  CHECK(data.user_ids.back() == 6040);
  CHECK(data.item_ids.front() == 48);
  CHECK(data.item_ids.back() == 3408);
  CHECK(std::is_sorted(data.user_ids.begin(), data.user_ids.end()));
  CHECK(std::is_sorted(data.item_ids.begin(), data.item_ids.end()));
}

TEST_CASE("single line parses to one interaction") {
  const auto path = write_temp("recsim_one_line.dat",
                               "1::1193::5::978300760\n");
  const auto data = load_movielens(path.string());
  CHECK(data.num_users() == 1);
  CHECK(data.num_items() == 1);
  CHECK(data.num_pairs() == 1);
  CHECK(data.user_ids[0] == 1);
  CHECK(data.item_ids[0] == 1193);
  fs::remove(path);
}

TEST_CASE("duplicate pairs collapse to one") {
  const auto path = write_temp(
      "recsim_dup.dat",
      "1::10::5::100\n1::10::3::200\n2::10::1::300\n");
  const auto data = load_movielens(path.string());
  CHECK(data.num_users() == 2);
  CHECK(data.num_items() == 1);
  CHECK(data.num_pairs() == 2);
  fs::remove(path);
}

TEST_CASE("malformed lines report the line number") {
  const auto path = write_temp("recsim_bad.dat",
                               "1::10::5::100\n2:11:4:100\n");
  CHECK_THROWS_WITH_AS(load_movielens(path.string()), doctest::Contains(":2:"),
                       std::invalid_argument);
  const auto nonint = write_temp("recsim_bad2.dat", "1::abc::5::100\n");
  CHECK_THROWS_AS(load_movielens(nonint.string()), std::invalid_argument);
  fs::remove(path);
  fs::remove(nonint);
}

TEST_CASE("missing and empty files are errors") {
  CHECK_THROWS_WITH_AS(load_movielens("/nonexistent/ratings.dat"),
                       doctest::Contains("/nonexistent/ratings.dat"),
                       std::invalid_argument);
  const auto path = write_temp("recsim_empty.dat", "");
  CHECK_THROWS_AS(load_movielens(path.string()), std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("loading is order-insensitive") {
  std::ifstream f(kFixture);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(f, line)) lines.push_back(line);
  std::shuffle(lines.begin(), lines.end(), std::mt19937(77));
  std::string shuffled;
  for (const auto& l : lines) shuffled += l + "\n";
  const auto path = write_temp("recsim_shuffled.dat", shuffled);

  const auto a = load_movielens(kFixture);
  const auto b = load_movielens(path.string());
  CHECK(a.profiles == b.profiles);
  CHECK(a.user_ids == b.user_ids);
  CHECK(a.item_ids == b.item_ids);
  fs::remove(path);
}

TEST_CASE("delimited loader mirrors the movielens fixture") {
  const auto csv = load_delimited(kCsvFixture, {',', 0, 1, true});
  const auto ml = load_movielens(kFixture);
  CHECK(csv.profiles == ml.profiles);
  CHECK(csv.user_ids == ml.user_ids);
  CHECK(csv.item_ids == ml.item_ids);
}

TEST_CASE("delimited loader handles simple csv") {
  const auto path = write_temp("recsim_simple.csv", "u,i\n1,2\n1,3\n");
  const auto data = load_delimited(path.string(), {',', 0, 1, true});
  CHECK(data.num_users() == 1);
  CHECK(data.num_items() == 2);
  CHECK(data.num_pairs() == 2);
  fs::remove(path);
}

TEST_CASE("delimited loader errors name the missing column") {
  const auto path = write_temp("recsim_cols.csv", "1,2\n1\n");
  CHECK_THROWS_WITH_AS(load_delimited(path.string(), {',', 0, 1, false}),
                       doctest::Contains("missing column 1"),
                       std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("header-only file is an error") {
  const auto path = write_temp("recsim_header_only.csv", "u,i\n");
  CHECK_THROWS_WITH_AS(load_delimited(path.string(), {',', 0, 1, true}),
                       doctest::Contains("no data rows"),
                       std::invalid_argument);
  fs::remove(path);
}

TEST_CASE("interactions view matches counts") {
  const auto data = load_movielens(kFixture);
  const auto view = data.to_interactions();
  CHECK(view.num_items == 30);
  CHECK(view.num_users() == 8);
  std::size_t total = 0;
  for (const auto c : view.item_counts()) total += c;
  CHECK(total == 97);
}

// The full-scale checks run only when the real datasets are present.
TEST_CASE("full ml1m totals and statistic supports" *
          doctest::skip(std::getenv("RECSIM_ML1M") == nullptr)) {
  const char* path = std::getenv("RECSIM_ML1M");
  REQUIRE(path != nullptr);
  const auto data = load_movielens(path);
  CHECK(data.num_users() == 6040);
  CHECK(data.num_items() == 3706);
  CHECK(data.num_pairs() == 1000209);

  const auto view = data.to_interactions();
  const auto pop = popularity_distribution(view);
  CHECK(pop.support.back() <= 6040);  // no item outranks the user count
  const auto act = activity_distribution(view);
  CHECK(act.support.front() >= 20);  // every user rated at least 20 items
}

TEST_CASE("full steam totals" *
          doctest::skip(std::getenv("RECSIM_STMV1") == nullptr)) {
  // expects a delimited user,item export of the purchases
  const char* path = std::getenv("RECSIM_STMV1");
  REQUIRE(path != nullptr);
  const auto data = load_delimited(path, {',', 0, 1, true});
  CHECK(data.num_users() == 70912);
  CHECK(data.num_items() == 10978);
  CHECK(data.num_pairs() == 5094082);
}
