#pragma once

// Generators and numerical oracles shared by the unit tests and the
// acceptance binary. Nothing here calls into the code under test except to
// build inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "qboost/pcm.hpp"

namespace qboost::test_support {

inline std::vector<std::string> make_ids(std::size_t n, const char* prefix = "x") {
  std::vector<std::string> ids;
  for (std::size_t k = 0; k < n; ++k) {
    std::string id = std::to_string(k);
    ids.push_back(prefix + std::string(3 - std::min<std::size_t>(3, id.size()), '0') + id);
  }
  return ids;
}

inline std::vector<double> uniform_vector(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Every ordered off-diagonal cell drawn from U[lo, hi].
inline PairComparisonMatrix random_pcm(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  PairComparisonMatrix pcm(make_ids(n));
  std::uniform_real_distribution<double> d(lo, hi);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) pcm.add(i, j, d(rng));
  return pcm;
}

// Standard normal CDF from the C library only.
inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Counts drawn from the Case III model with known parameters.
inline PairComparisonMatrix draw_case3_counts(const std::vector<double>& s,
                                              const std::vector<double>& sigma,
                                              unsigned per_pair, std::mt19937_64& rng) {
  const std::size_t n = s.size();
  PairComparisonMatrix pcm(make_ids(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = phi_cdf((s[i] - s[j]) / std::sqrt(sigma[i] * sigma[i] + sigma[j] * sigma[j]));
      std::binomial_distribution<unsigned> b(per_pair, p);
      const unsigned wins = b(rng);
      if (wins > 0) pcm.add(i, j, wins);
      if (per_pair - wins > 0) pcm.add(j, i, per_pair - wins);
    }
  return pcm;
}

// Five-point central difference of f along coordinate k. Truncation and
// rounding error are both near 1e-11 for O(1) curvature.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t k) {
  const double h = 1e-3 * std::max(1.0, std::abs(x[k]));
  const double x0 = x[k];
  auto at = [&](double d) {
    x[k] = x0 + d;
    return f(x);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

// |a - b| relative to max(|a|, |b|, floor).
inline double relative_error(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Maximum total weight over every labelled spanning tree of K_n, by decoding
// all n^(n-2) Pruefer sequences. Exponential; n <= 8.
inline double best_tree_weight_exhaustive(std::size_t n, const std::vector<double>& w) {
  if (n == 2) return w[1];
  const std::size_t len = n - 2;
  std::vector<std::size_t> seq(len, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::size_t> degree(n, 1);
    for (std::size_t v : seq) ++degree[v];
    double total = 0.0;
    for (std::size_t v : seq) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      total += w[leaf * n + v];
      --degree[leaf];
      --degree[v];
    }
    std::size_t a = n, b = n;
    for (std::size_t v = 0; v < n; ++v)
      if (degree[v] == 1) (a == n ? a : b) = v;
    total += w[a * n + b];
    best = std::max(best, total);
    std::size_t k = 0;
    while (k < len && ++seq[k] == n) seq[k++] = 0;
    if (k == len) break;
  }
  return best;
}

// Symmetric n x n weights with zero diagonal; a coarse grid forces ties.
inline std::vector<double> random_gains(std::size_t n, std::mt19937_64& rng, bool coarse = false) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> w(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = d(rng);
      if (coarse) v = std::floor(v * 4.0) / 4.0;
      w[i * n + j] = w[j * n + i] = v;
    }
  return w;
}

struct RandomAcr {
  AcrRatingTable table;
  // rated[o][s]
  std::vector<std::vector<bool>> rated;
  std::vector<std::vector<double>> value;
};

// Observers rate a random 90% of stimuli on a 5-level grade, so ties are common.
inline RandomAcr random_acr(std::size_t observers, std::size_t stimuli, std::mt19937_64& rng) {
  RandomAcr r{AcrRatingTable(make_ids(stimuli, "s"), std::make_pair(1.0, 5.0)), {}, {}};
  std::bernoulli_distribution missing(0.1);
  std::uniform_int_distribution<int> grade(1, 5);
  const auto ids = make_ids(stimuli, "s");
  r.rated.assign(observers, std::vector<bool>(stimuli, false));
  r.value.assign(observers, std::vector<double>(stimuli, 0.0));
  for (std::size_t o = 0; o < observers; ++o)
    for (std::size_t s = 0; s < stimuli; ++s) {
      if (missing(rng)) continue;
      r.rated[o][s] = true;
      r.value[o][s] = grade(rng);
      r.table.add_rating("obs" + std::to_string(o), ids[s], r.value[o][s]);
    }
  return r;
}

}  // namespace qboost::test_support
