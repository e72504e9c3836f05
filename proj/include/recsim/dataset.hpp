#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recsim/stats.hpp"

namespace recsim {

// A reference interaction dataset, binarized and remapped to dense 0-based
// indices. Original ids are kept (index -> id) so results stay traceable.
// The remap orders ids ascending, making loads order-insensitive.
struct ReferenceDataset {
  std::vector<std::vector<std::uint32_t>> profiles;  // per dense user, sorted
  std::vector<std::int64_t> user_ids;                // dense -> original
  std::vector<std::int64_t> item_ids;
  std::string source;
  std::string format;

  std::size_t num_users() const { return user_ids.size(); }
  std::size_t num_items() const { return item_ids.size(); }
  std::size_t num_pairs() const;
  Interactions to_interactions() const;
};

// MovieLens-1M ratings format: UserID::MovieID::Rating::Timestamp, one
// record per line, no header. Rating and timestamp are discarded; duplicate
// (user, item) lines collapse to one interaction.
ReferenceDataset load_movielens(const std::string& path);

struct DelimitedSpec {
  char delimiter = ',';
  std::uint32_t user_col = 0;
  std::uint32_t item_col = 1;
  bool header = false;
};

// Generic single-character-delimited loader with selectable columns.
ReferenceDataset load_delimited(const std::string& path,
                                const DelimitedSpec& spec);

}  // namespace recsim
