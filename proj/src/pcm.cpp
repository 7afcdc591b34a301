#include "qboost/pcm.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/hash.hpp"

namespace qboost {

PairComparisonMatrix::PairComparisonMatrix(std::vector<std::string> stimulus_ids)
    : ids_(std::move(stimulus_ids)), counts_(ids_.size() * ids_.size(), 0.0) {}

PairComparisonMatrix::PairComparisonMatrix(std::vector<std::string> stimulus_ids,
                                           std::vector<double> counts)
    : ids_(std::move(stimulus_ids)), counts_(std::move(counts)) {
  const std::size_t n = ids_.size();
  if (counts_.size() != n * n) throw UsageError("count matrix is not n x n");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double c = counts_[i * n + j];
      if (!std::isfinite(c) || c < 0.0) throw DataError("counts must be finite and non-negative");
      if (i == j && c != 0.0) throw DataError("diagonal counts must be zero");
    }
  }
}

void PairComparisonMatrix::add(std::size_t winner, std::size_t loser, double mass) {
  if (winner >= size() || loser >= size()) throw UsageError("stimulus index out of range");
  if (winner == loser) throw UsageError("a stimulus cannot be compared with itself");
  if (!std::isfinite(mass) || mass < 0.0) throw UsageError("mass must be finite and non-negative");
  counts_[winner * size() + loser] += mass;
}

std::optional<std::size_t> PairComparisonMatrix::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

double PairComparisonMatrix::total_mass() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

AcrRatingTable::AcrRatingTable(std::vector<std::string> stimulus_ids,
                               std::optional<std::pair<double, double>> scale_bounds)
    : stimulus_ids_(std::move(stimulus_ids)), bounds_(scale_bounds) {
  for (std::size_t i = 0; i < stimulus_ids_.size(); ++i) {
    if (!stimulus_index_.emplace(stimulus_ids_[i], i).second)
      throw DataError("duplicate stimulus id: " + stimulus_ids_[i]);
  }
}

void AcrRatingTable::add_rating(const std::string& observer, const std::string& stimulus,
                                double rating) {
  const auto s = stimulus_index_.find(stimulus);
  if (s == stimulus_index_.end()) throw DataError("unknown stimulus: " + stimulus);
  if (!std::isfinite(rating)) throw DataError("rating is not finite");
  if (bounds_ && (rating < bounds_->first || rating > bounds_->second))
    throw DataError("rating outside the scale bounds");
  auto [it, inserted] = observer_index_.emplace(observer, observer_ids_.size());
  if (inserted) {
    observer_ids_.push_back(observer);
    ratings_.emplace_back(stimulus_ids_.size());
  }
  auto& slot = ratings_[it->second][s->second];
  if (slot) throw DataError("duplicate rating for observer " + observer + ", stimulus " + stimulus);
  slot = rating;
  ++rating_count_;
}

PairComparisonMatrix pcm_from_acr(const AcrRatingTable& ratings) {
  if (ratings.empty()) throw DataError("no ratings");
  const std::size_t n = ratings.stimulus_ids().size();
  if (n < 2) throw DataError("at least two stimuli are required");
  PairComparisonMatrix pcm(ratings.stimulus_ids());
  for (std::size_t obs = 0; obs < ratings.observer_count(); ++obs) {
    const auto r = ratings.ratings_of(obs);
    for (std::size_t i = 0; i < n; ++i) {
      if (!r[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!r[j]) continue;
        if (*r[i] > *r[j]) {
          pcm.add(i, j, 1.0);
        } else if (*r[i] < *r[j]) {
          pcm.add(j, i, 1.0);
        } else {
          pcm.add(i, j, 0.5);
          pcm.add(j, i, 0.5);
        }
      }
    }
  }
  return pcm;
}

PairComparisonMatrix pcm_merge(const PairComparisonMatrix& base,
                               const PairComparisonMatrix& delta) {
  if (base.stimulus_ids() != delta.stimulus_ids()) throw DataError("incompatible matrices");
  std::vector<double> sum(base.counts().begin(), base.counts().end());
  const auto d = delta.counts();
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += d[k];
  return PairComparisonMatrix(base.stimulus_ids(), std::move(sum));
}

BinaryPreferenceMatrix pcm_binarize(const PairComparisonMatrix& pcm, double threshold) {
  const std::size_t n = pcm.size();
  BinaryPreferenceMatrix b;
  b.n = n;
  b.cells.assign(n * n, BinaryPreferenceMatrix::kMissing);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double total = pcm.pair_total(i, j);
      if (total <= 0.0) {
        ++b.missing_pairs;
        continue;
      }
      const double pij = pcm.count(i, j) / total;
      const double pji = pcm.count(j, i) / total;
      b.cells[i * n + j] = pij > threshold ? 1 : 0;
      b.cells[j * n + i] = pji > threshold ? 1 : 0;
      if (pij == threshold || pji == threshold) ++b.ties;
    }
  }
  return b;
}

PairComparisonMatrix with_pseudocount(const PairComparisonMatrix& pcm, double pseudocount) {
  if (!(pseudocount >= 0.0) || !std::isfinite(pseudocount))
    throw UsageError("pseudocount must be finite and non-negative");
  const std::size_t n = pcm.size();
  std::vector<double> c(pcm.counts().begin(), pcm.counts().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) c[i * n + j] += pseudocount;
  return PairComparisonMatrix(pcm.stimulus_ids(), std::move(c));
}

std::vector<std::vector<std::size_t>> comparison_components(const PairComparisonMatrix& pcm) {
  const std::size_t n = pcm.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (pcm.pair_total(i, j) > 0.0) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == n) {
      slot[r] = groups.size();
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

std::string pcm_digest(const PairComparisonMatrix& pcm) {
  std::ostringstream out;
  write_pcm_csv(out, pcm);
  // ids are part of the digest so that zero-count stimuli are not lost
  for (const auto& id : pcm.stimulus_ids()) out << id << '\n';
  return to_hex(fnv1a64(out.str()));
}

}  // namespace qboost
