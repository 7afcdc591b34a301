#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qboost/json_io.hpp"
#include "qboost/sampler.hpp"
#include "qboost/thurstone.hpp"

namespace qboost {

struct GroundTruth {
  std::vector<double> s_true;      // U[1, 5]
  std::vector<double> sigma_true;  // U[0, 0.7]
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return s_true.size(); }
};

GroundTruth draw_ground_truth(std::size_t n, std::uint64_t seed);

enum class NoiseModel {
  Gaussian,         // r_i ~ N(s_i, sigma_i^2)
  UniformAdditive,  // r_i = s_i + U(0, 0.7), fresh per draw
};

enum class Outcome { FirstWins, SecondWins };

Outcome simulate_comparison(const GroundTruth& gt, std::size_t i, std::size_t j,
                            std::mt19937_64& rng, NoiseModel noise = NoiseModel::Gaussian);

// Single-stimulus ratings of `observers` simulated viewers, rounded to the
// nearest of `levels` integer grades 1..levels.
AcrRatingTable simulate_acr(const GroundTruth& gt, std::size_t observers, int levels,
                            std::mt19937_64& rng, NoiseModel noise = NoiseModel::Gaussian);

struct SimulationConfig {
  std::size_t n = 60;
  std::size_t reps = 100;
  std::size_t standard_trials = 50;
  std::vector<Model> models{Model::Case3, Model::Case5, Model::BradleyTerry};
  std::uint64_t seed = 1;
  bool acr_init = false;
  std::size_t acr_observers = 20;
  int acr_levels = 5;
  NoiseModel noise = NoiseModel::Gaussian;
  // One start per refit: every refit is warm-started from the previous estimate.
  FitOptions fit = [] {
    FitOptions f;
    f.restarts = 1;
    return f;
  }();
  int quadrature_order = kDefaultQuadratureOrder;
  BatchMode batch_mode = BatchMode::SpanningTree;
  std::size_t threads = 0;  // 0: thread_budget()
};

struct TrialStat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across repetitions

  friend bool operator==(const TrialStat&, const TrialStat&) = default;
};

struct ModelCurve {
  Model model = Model::Case3;
  std::vector<TrialStat> trials;  // index k = after standard trial k + 1

  friend bool operator==(const ModelCurve&, const ModelCurve&) = default;
};

struct SimulationReport {
  SimulationConfig config;
  std::vector<ModelCurve> curves;  // in config.models order

  const ModelCurve& curve(Model m) const;
};

// SROCC after each standard trial of one repetition, one row per model.
std::vector<std::vector<double>> simulate_repetition(const SimulationConfig& config,
                                                     std::size_t rep);

// Aggregates rows[rep][model][trial]; independent of repetition order up to
// floating-point summation order, which is fixed by rep index.
std::vector<ModelCurve> aggregate_curves(const std::vector<Model>& models,
                                         const std::vector<std::vector<std::vector<double>>>& rows);

SimulationReport run_simulation(const SimulationConfig& config);

Json report_to_json(const SimulationReport& report);
std::string report_to_csv(const SimulationReport& report);

}  // namespace qboost
