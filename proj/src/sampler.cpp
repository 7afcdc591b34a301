#include "qboost/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qboost/error.hpp"
#include "qboost/kernels.hpp"
#include "qboost/normal.hpp"

namespace qboost {

namespace {

void check_pair(const QualityEstimate& est, std::size_t i, std::size_t j) {
  const std::size_t n = est.size();
  if (i >= n || j >= n) throw UsageError("stimulus index out of range");
  if (i == j) throw UsageError("a pair needs two distinct stimuli");
  if (est.covariance.size() != n * n || est.sigma_hat.size() != n)
    throw UsageError("estimate has no covariance");
}

kernels::Link link_of(Model m) {
  return m == Model::BradleyTerry ? kernels::Link::Logistic : kernels::Link::Probit;
}

// Argument scale of the link for pair (i, j).
double link_scale(const QualityEstimate& est, std::size_t i, std::size_t j) {
  switch (est.model) {
    case Model::Case3: {
      const double a = est.sigma_hat[i], b = est.sigma_hat[j];
      return 1.0 / std::sqrt(a * a + b * b);
    }
    case Model::Case5:
    case Model::BradleyTerry:
      break;
  }
  return 1.0;
}

struct NormalisedRule {
  std::vector<double> nodes, weights;
};

NormalisedRule normalise(const QuadratureRule& rule) {
  if (rule.order() == 0 || rule.weights.size() != rule.order())
    throw UsageError("invalid quadrature rule");
  NormalisedRule r{rule.nodes, rule.weights};
  for (double& w : r.weights) w /= kSqrtPi;
  return r;
}

bool batch_before(const PairGain& a, const PairGain& b) {
  if (a.eig != b.eig) return a.eig > b.eig;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

std::vector<PairGain> ordered_pairs(std::size_t n, std::span<const double> gains) {
  std::vector<PairGain> all;
  all.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.push_back({i, j, gains[i * n + j]});
  std::sort(all.begin(), all.end(), batch_before);
  return all;
}

}  // namespace

PosteriorDifference posterior_difference(const QualityEstimate& est, std::size_t i,
                                         std::size_t j) {
  check_pair(est, i, j);
  const double var = est.cov(i, i) + est.cov(j, j) - 2.0 * est.cov(i, j);
  return {est.s_hat[i] - est.s_hat[j], std::sqrt(std::max(var, kPosteriorVarianceFloor))};
}

double pair_eig(const QualityEstimate& est, std::size_t i, std::size_t j,
                const QuadratureRule& rule) {
  const PosteriorDifference d = posterior_difference(est, i, j);
  const NormalisedRule r = normalise(rule);
  const double mean = d.mean;
  const double spread = kSqrt2 * d.std;
  const double scale = link_scale(est, i, j);
  double out = 0.0;
  kernels::active().expected_gain(link_of(est.model), &mean, &spread, &scale, r.nodes.data(),
                                  r.weights.data(), r.nodes.size(), &out, 1);
  return out;
}

std::vector<double> eig_matrix(const QualityEstimate& est, const QuadratureRule& rule) {
  const std::size_t n = est.size();
  if (n < 2) throw UsageError("at least two stimuli are required");
  const NormalisedRule r = normalise(rule);
  const std::size_t m = n * (n - 1) / 2;
  std::vector<double> mean(m), spread(m), scale(m), out(m);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const PosteriorDifference d = posterior_difference(est, i, j);
      mean[k] = d.mean;
      spread[k] = kSqrt2 * d.std;
      scale[k] = link_scale(est, i, j);
    }
  kernels::active().expected_gain(link_of(est.model), mean.data(), spread.data(), scale.data(),
                                  r.nodes.data(), r.weights.data(), r.nodes.size(), out.data(), m);
  std::vector<double> gains(n * n, 0.0);
  k = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++k) gains[i * n + j] = gains[j * n + i] = out[k];
  return gains;
}

std::vector<PairGain> max_spanning_tree(std::size_t n, std::span<const double> gains) {
  if (n < 2) throw UsageError("at least two stimuli are required");
  if (gains.size() != n * n) throw UsageError("gain matrix must be n x n");
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<PairGain> tree;
  tree.reserve(n - 1);
  for (const PairGain& e : ordered_pairs(n, gains)) {
    const std::size_t a = find(e.i), b = find(e.j);
    if (a == b) continue;
    parent[a] = b;
    tree.push_back(e);
    if (tree.size() == n - 1) break;
  }
  return tree;
}

SamplingBatch select_batch_from_gains(std::size_t n, std::span<const double> gains,
                                      std::size_t n_pc, BatchMode mode) {
  if (n < 2) throw UsageError("at least two stimuli are required");
  if (n_pc < 1) throw UsageError("batch size must be >= 1");
  if (n_pc > n * (n - 1) / 2) throw UsageError("batch exceeds pair universe");
  if (gains.size() != n * n) throw UsageError("gain matrix must be n x n");
  SamplingBatch batch;
  if (mode == BatchMode::GlobalTopK) {
    auto all = ordered_pairs(n, gains);
    all.resize(n_pc);
    batch.pairs = std::move(all);
    return batch;
  }
  batch.pairs = max_spanning_tree(n, gains);
  if (batch.pairs.size() > n_pc) {
    batch.pairs.resize(n_pc);
  } else if (batch.pairs.size() < n_pc) {
    std::vector<char> in_tree(n * n, 0);
    for (const auto& e : batch.pairs) in_tree[e.i * n + e.j] = 1;
    for (const PairGain& e : ordered_pairs(n, gains)) {
      if (batch.pairs.size() == n_pc) break;
      if (!in_tree[e.i * n + e.j]) batch.pairs.push_back(e);
    }
    std::sort(batch.pairs.begin(), batch.pairs.end(), batch_before);
  }
  return batch;
}

SamplingBatch select_batch(const QualityEstimate& est, std::size_t n_pc,
                           const QuadratureRule& rule, BatchMode mode) {
  const std::vector<double> gains = eig_matrix(est, rule);
  return select_batch_from_gains(est.size(), gains, n_pc, mode);
}

}  // namespace qboost
