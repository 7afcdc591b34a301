#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "qboost/pcm.hpp"

namespace qboost {

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// Header `observer_id,stimulus_id,rating`. Stimulus ids of the table are the
// sorted set of ids present in the file. Errors carry `source:line:`.
AcrRatingTable read_acr_csv(std::istream& in, std::string_view source = "<acr>");
AcrRatingTable read_acr_csv(const std::filesystem::path& path);
void write_acr_csv(std::ostream& out, const AcrRatingTable& table);

// Long form, header `winner_id,loser_id,count`. Zero rows are omitted on
// write; the matrix read back spans the sorted union of ids.
PairComparisonMatrix read_pcm_csv(std::istream& in, std::string_view source = "<pcm>");
PairComparisonMatrix read_pcm_csv(const std::filesystem::path& path);
void write_pcm_csv(std::ostream& out, const PairComparisonMatrix& pcm);
void write_pcm_csv(const std::filesystem::path& path, const PairComparisonMatrix& pcm);

}  // namespace qboost
