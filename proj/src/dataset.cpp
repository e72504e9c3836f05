#include "recsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace recsim {

std::size_t ReferenceDataset::num_pairs() const {
  std::size_t total = 0;
  for (const auto& prof : profiles) total += prof.size();
  return total;
}

Interactions ReferenceDataset::to_interactions() const {
  Interactions out;
  out.num_items = static_cast<std::uint32_t>(num_items());
  out.profiles = profiles;
  return out;
}

namespace {

std::int64_t parse_id(std::string_view field, const std::string& path,
                      std::size_t line_no) {
  std::int64_t value = 0;
  const auto* begin = field.data();
  const auto* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                ": expected an integer id, got '" +
                                std::string(field) + "'");
  return value;
}

ReferenceDataset build_dataset(std::vector<std::pair<std::int64_t, std::int64_t>> pairs,
                               std::string source, std::string format) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  ReferenceDataset data;
  data.source = std::move(source);
  data.format = std::move(format);
  for (const auto& [u, i] : pairs) {
    if (data.user_ids.empty() || data.user_ids.back() != u)
      data.user_ids.push_back(u);
    data.item_ids.push_back(i);
  }
  std::sort(data.item_ids.begin(), data.item_ids.end());
  data.item_ids.erase(std::unique(data.item_ids.begin(), data.item_ids.end()),
                      data.item_ids.end());

  data.profiles.resize(data.user_ids.size());
  std::size_t user_idx = 0;
  for (const auto& [u, i] : pairs) {
    while (data.user_ids[user_idx] != u) ++user_idx;
    const auto it =
        std::lower_bound(data.item_ids.begin(), data.item_ids.end(), i);
    data.profiles[user_idx].push_back(
        static_cast<std::uint32_t>(it - data.item_ids.begin()));
  }
  for (auto& prof : data.profiles) std::sort(prof.begin(), prof.end());
  return data;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

ReferenceDataset load_movielens(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("load_movielens: cannot open " + path);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    // UserID::MovieID::Rating::Timestamp
    std::size_t fields[3];
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      pos = line.find("::", pos);
      if (pos == std::string::npos)
        throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                    ": malformed record, expected "
                                    "UserID::MovieID::Rating::Timestamp");
      fields[s] = pos;
      pos += 2;
    }
    const std::string_view view(line);
    const auto user = parse_id(view.substr(0, fields[0]), path, line_no);
    const auto item = parse_id(
        view.substr(fields[0] + 2, fields[1] - fields[0] - 2), path, line_no);
    const bool rating_empty = fields[2] <= fields[1] + 2;
    if (rating_empty || fields[2] + 2 >= line.size())
      throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                  ": missing rating or timestamp field");
    pairs.emplace_back(user, item);
  }
  if (pairs.empty())
    throw std::invalid_argument("load_movielens: no records in " + path);
  return build_dataset(std::move(pairs), path, "ml1m");
}

ReferenceDataset load_delimited(const std::string& path,
                                const DelimitedSpec& spec) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("load_delimited: cannot open " + path);
  const std::uint32_t need = std::max(spec.user_col, spec.item_col);
  std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !spec.header;
  while (std::getline(f, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::vector<std::string_view> fields;
    const std::string_view view(line);
    std::size_t start = 0;
    for (;;) {
      const auto end = view.find(spec.delimiter, start);
      fields.push_back(view.substr(
          start, end == std::string_view::npos ? end : end - start));
      if (end == std::string_view::npos) break;
      start = end + 1;
    }
    if (fields.size() <= need)
      throw std::invalid_argument(
          path + ":" + std::to_string(line_no) + ": missing column " +
          std::to_string(need) + " (line has " +
          std::to_string(fields.size()) + " fields)");
    pairs.emplace_back(parse_id(fields[spec.user_col], path, line_no),
                       parse_id(fields[spec.item_col], path, line_no));
  }
  if (pairs.empty())
    throw std::invalid_argument("load_delimited: no data rows in " + path);
  return build_dataset(std::move(pairs), path, "delimited");
}

}  // namespace recsim
