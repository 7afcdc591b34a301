#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qboost {

// Accumulated pairwise preference mass. count(i, j) is the mass of outcomes
// "i preferred over j". Counts are reals so that tie halves stay exact.
//
// Invariants: zero diagonal, every count >= 0 and finite.
class PairComparisonMatrix {
 public:
  PairComparisonMatrix() = default;
  explicit PairComparisonMatrix(std::vector<std::string> stimulus_ids);
  // counts is row-major n x n.
  PairComparisonMatrix(std::vector<std::string> stimulus_ids, std::vector<double> counts);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& stimulus_ids() const noexcept { return ids_; }
  std::span<const double> counts() const noexcept { return counts_; }

  double count(std::size_t i, std::size_t j) const { return counts_[i * size() + j]; }
  // m_ij + m_ji
  double pair_total(std::size_t i, std::size_t j) const { return count(i, j) + count(j, i); }
  void add(std::size_t winner, std::size_t loser, double mass);

  std::optional<std::size_t> index_of(const std::string& id) const;
  double total_mass() const;

  friend bool operator==(const PairComparisonMatrix&, const PairComparisonMatrix&) = default;

 private:
  std::vector<std::string> ids_;
  std::vector<double> counts_;
};

// Raw single-stimulus ratings. Observers may skip stimuli.
class AcrRatingTable {
 public:
  explicit AcrRatingTable(std::vector<std::string> stimulus_ids,
                          std::optional<std::pair<double, double>> scale_bounds = std::nullopt);

  // Throws DataError on unknown stimulus, duplicate rating or a rating
  // outside the scale bounds.
  void add_rating(const std::string& observer, const std::string& stimulus, double rating);

  const std::vector<std::string>& stimulus_ids() const noexcept { return stimulus_ids_; }
  const std::vector<std::string>& observer_ids() const noexcept { return observer_ids_; }
  std::size_t observer_count() const noexcept { return observer_ids_.size(); }
  std::size_t rating_count() const noexcept { return rating_count_; }
  bool empty() const noexcept { return rating_count_ == 0; }

  // Ratings of one observer indexed by stimulus; nullopt where missing.
  std::span<const std::optional<double>> ratings_of(std::size_t observer) const {
    return ratings_[observer];
  }

 private:
  std::vector<std::string> stimulus_ids_;
  std::unordered_map<std::string, std::size_t> stimulus_index_;
  std::optional<std::pair<double, double>> bounds_;
  std::vector<std::string> observer_ids_;
  std::unordered_map<std::string, std::size_t> observer_index_;
  std::vector<std::vector<std::optional<double>>> ratings_;
  std::size_t rating_count_ = 0;
};

// Binarised pairwise majority. cell(i, j) is 1, 0, or kMissing (diagonal and
// pairs without data).
struct BinaryPreferenceMatrix {
  static constexpr std::int8_t kMissing = -1;

  std::size_t n = 0;
  std::vector<std::int8_t> cells;
  // unordered pairs whose proportion sat exactly on the threshold
  std::size_t ties = 0;
  // unordered pairs with zero total mass
  std::size_t missing_pairs = 0;

  std::int8_t cell(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
};

// Every observer contributes once per unordered pair it rated on both sides:
// +1 to the higher rated stimulus, +0.5 to each on a tie.
PairComparisonMatrix pcm_from_acr(const AcrRatingTable& ratings);

// Element-wise sum; ids must match in order.
PairComparisonMatrix pcm_merge(const PairComparisonMatrix& base,
                               const PairComparisonMatrix& delta);

// b(i, j) = 1 iff m_ij / (m_ij + m_ji) > threshold.
BinaryPreferenceMatrix pcm_binarize(const PairComparisonMatrix& pcm, double threshold);

// PCM with every off-diagonal count increased by `pseudocount`.
PairComparisonMatrix with_pseudocount(const PairComparisonMatrix& pcm, double pseudocount);

// Connected components of the graph joining pairs with positive total mass,
// each sorted, ordered by their smallest member.
std::vector<std::vector<std::size_t>> comparison_components(const PairComparisonMatrix& pcm);

// 64-bit FNV-1a of the canonical CSV form, as 16 hex digits.
std::string pcm_digest(const PairComparisonMatrix& pcm);

}  // namespace qboost
