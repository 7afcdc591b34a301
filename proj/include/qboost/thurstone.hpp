#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qboost/pcm.hpp"

namespace qboost {

enum class Model {
  Case3,         // Thurstone Case III, per-stimulus dispersion
  Case5,         // Thurstone Case V (Thurstone-Mosteller)
  BradleyTerry,  // logistic link
};

std::string_view model_name(Model m);
// Accepts "case3", "case5", "bt".
Model parse_model(std::string_view name);

// Dispersion reported for models without a fitted sigma.
// Case V: 1/sqrt(2), so the discriminal difference has unit variance.
// Bradley-Terry: pi/sqrt(6), the per-stimulus share of the logistic variance.
double conventional_sigma(Model m);

// Recovered scale. Scores are normalised to mean 0; for Case III the
// dispersions are additionally normalised to mean(sigma^2) = 1.
struct QualityEstimate {
  Model model = Model::Case3;
  std::vector<std::string> stimulus_ids;
  std::vector<double> s_hat;
  std::vector<double> sigma_hat;
  std::vector<double> covariance;  // n x n row-major, covariance of s_hat
  double log_likelihood = 0.0;     // at the optimum, including pseudocounts
  bool converged = false;
  int iterations = 0;

  std::size_t size() const noexcept { return s_hat.size(); }
  double cov(std::size_t i, std::size_t j) const { return covariance[i * size() + j]; }

  friend bool operator==(const QualityEstimate&, const QualityEstimate&) = default;
};

struct FitOptions {
  double pseudocount = 0.5;
  double gradient_tolerance = 1e-8;
  int max_iterations = 2000;
  int restarts = 3;
  std::uint64_t seed = 0;
  // Case III only: penalty (w/2) * sum_i (log sigma_i - mean log sigma)^2.
  // Without it sparse designs let single dispersions collapse to zero.
  // Scale invariant; 0 gives the plain MLE.
  double dispersion_prior = 1.0;
  // Optional: called after each accepted optimizer iteration with the
  // optimised objective: the pseudocount-regularised log likelihood minus the
  // dispersion penalty and the penalties pinning location and scale. Strictly
  // increasing within a restart; equal to the penalised likelihood once the
  // pins are satisfied.
  std::function<void(int restart, int iteration, double objective)> on_iteration;
};

// Phi((s_i - s_j) / sqrt(sigma_i^2 + sigma_j^2)).
double win_probability(double s_i, double s_j, double sigma_i, double sigma_j);

// Case III log likelihood  sum_{i<j} m_ij log pi_ij + m_ji log(1 - pi_ij).
double log_likelihood(std::span<const double> s, std::span<const double> sigma,
                      const PairComparisonMatrix& pcm);

struct LikelihoodGradient {
  std::vector<double> d_s;
  std::vector<double> d_sigma;
};
LikelihoodGradient log_likelihood_gradient(std::span<const double> s,
                                           std::span<const double> sigma,
                                           const PairComparisonMatrix& pcm);

// Bradley-Terry counterparts, pi_ij = 1 / (1 + exp(-(s_i - s_j))).
double bt_log_likelihood(std::span<const double> s, const PairComparisonMatrix& pcm);
std::vector<double> bt_log_likelihood_gradient(std::span<const double> s,
                                               const PairComparisonMatrix& pcm);

// Second derivatives of the Case III log likelihood, n x n row-major.
std::vector<double> score_hessian(std::span<const double> s, std::span<const double> sigma,
                                  const PairComparisonMatrix& pcm);
std::vector<double> sigma_hessian(std::span<const double> s, std::span<const double> sigma,
                                  const PairComparisonMatrix& pcm);
std::vector<double> bt_score_hessian(std::span<const double> s, const PairComparisonMatrix& pcm);

// Leading n x n block of [[-H, 1], [1', 0]]^-1.
std::vector<double> covariance_of_estimates(std::span<const double> hessian, std::size_t n);

QualityEstimate fit_thurstone_case3(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                    const QualityEstimate* warm_start = nullptr);
QualityEstimate fit_thurstone_case5(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                    const QualityEstimate* warm_start = nullptr);
QualityEstimate fit_bradley_terry(const PairComparisonMatrix& pcm, const FitOptions& opts,
                                  const QualityEstimate* warm_start = nullptr);
QualityEstimate fit_model(Model model, const PairComparisonMatrix& pcm, const FitOptions& opts,
                          const QualityEstimate* warm_start = nullptr);

// Covariance of sigma_hat for a Case III estimate: the bordered inverse of
// the sigma block of the Hessian of the objective the fit maximised
// (pseudocount-regularised likelihood and dispersion penalty from opts).
std::vector<double> sigma_covariance(const PairComparisonMatrix& pcm, const QualityEstimate& est,
                                     const FitOptions& opts);

}  // namespace qboost
