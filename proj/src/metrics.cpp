#include "qboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qboost/error.hpp"

namespace qboost {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k + 1;
    while (end < n && values[order[end]] == values[order[k]]) ++end;
    const double r = 0.5 * static_cast<double>(k + 1 + end);  // mean of k+1..end
    for (std::size_t t = k; t < end; ++t) ranks[order[t]] = r;
    k = end;
  }
  return ranks;
}

double srocc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw UsageError("srocc: length mismatch");
  if (a.size() < 2) throw UsageError("srocc: at least two values are required");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double x = ra[i] - mean, y = rb[i] - mean;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  if (saa == 0.0 || sbb == 0.0) throw DataError("undefined correlation");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

AgreementResult agreement_proportion(const PairComparisonMatrix& reference,
                                     std::span<const double> scores) {
  const std::size_t n = reference.size();
  if (scores.size() != n) throw UsageError("agreement: score vector does not match the matrix");
  const BinaryPreferenceMatrix truth = pcm_binarize(reference, 0.5);
  AgreementResult res;
  res.missing_pairs = truth.missing_pairs;
  res.tied_reference_pairs = truth.ties;
  std::size_t same = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || truth.cell(i, j) == BinaryPreferenceMatrix::kMissing) continue;
      const int converted = scores[i] > scores[j] ? 1 : 0;
      if (converted == truth.cell(i, j)) ++same;
      ++res.compared;
      if (i < j && scores[i] == scores[j]) ++res.tied_score_pairs;
    }
  if (res.compared == 0) throw DataError("agreement: no pair carries ground-truth mass");
  res.proportion = static_cast<double>(same) / static_cast<double>(res.compared);
  return res;
}

}  // namespace qboost
