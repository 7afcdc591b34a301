#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qboost/quadrature.hpp"
#include "qboost/thurstone.hpp"

namespace qboost {

inline constexpr double kPosteriorVarianceFloor = 1e-6;
inline constexpr int kDefaultQuadratureOrder = 21;

struct PairGain {
  std::size_t i = 0;
  std::size_t j = 0;
  double eig = 0.0;

  friend bool operator==(const PairGain&, const PairGain&) = default;
};

// Pairs sorted by eig descending, ties by (min, max) index ascending.
struct SamplingBatch {
  int iteration = 0;
  std::vector<PairGain> pairs;

  friend bool operator==(const SamplingBatch&, const SamplingBatch&) = default;
};

enum class BatchMode {
  SpanningTree,  // maximum-EIG spanning tree, trimmed or topped up to size
  GlobalTopK,    // plain top-k by EIG (ablation)
};

// Distribution of s_i - s_j under the estimate.
struct PosteriorDifference {
  double mean = 0.0;
  double std = 0.0;
};

PosteriorDifference posterior_difference(const QualityEstimate& est, std::size_t i,
                                         std::size_t j);

// Expected information gain of comparing i and j.
double pair_eig(const QualityEstimate& est, std::size_t i, std::size_t j,
                const QuadratureRule& rule);

// Symmetric n x n row-major gain matrix, zero diagonal.
std::vector<double> eig_matrix(const QualityEstimate& est, const QuadratureRule& rule);

// Maximum-weight spanning tree of the complete graph, Kruskal with the
// batch ordering as the total order. Edges returned in that order.
std::vector<PairGain> max_spanning_tree(std::size_t n, std::span<const double> gains);

SamplingBatch select_batch_from_gains(std::size_t n, std::span<const double> gains,
                                      std::size_t n_pc, BatchMode mode = BatchMode::SpanningTree);

SamplingBatch select_batch(const QualityEstimate& est, std::size_t n_pc,
                           const QuadratureRule& rule, BatchMode mode = BatchMode::SpanningTree);

}  // namespace qboost
