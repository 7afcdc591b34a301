#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qboost/pcm.hpp"

namespace qboost {

// Average (tie-corrected) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

// Spearman rank correlation: Pearson correlation of average ranks.
// Throws DataError("undefined correlation") for a constant input.
double srocc(std::span<const double> a, std::span<const double> b);

struct AgreementResult {
  double proportion = 0.0;
  // ordered off-diagonal cells compared
  std::size_t compared = 0;
  // unordered pairs without ground-truth mass, excluded
  std::size_t missing_pairs = 0;
  // unordered ground-truth pairs sitting exactly on the 0.5 threshold
  std::size_t tied_reference_pairs = 0;
  // unordered compared pairs with equal scores
  std::size_t tied_score_pairs = 0;
};

// Fraction of off-diagonal cells where [scores_i > scores_j] matches the
// binarised ground truth (threshold 0.5, strict).
AgreementResult agreement_proportion(const PairComparisonMatrix& reference,
                                     std::span<const double> scores);

}  // namespace qboost
