#include "qboost/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/hash.hpp"
#include "qboost/metrics.hpp"
#include "qboost/parallel.hpp"

namespace qboost {

namespace {

constexpr double kScoreLow = 1.0;
constexpr double kScoreHigh = 5.0;
constexpr double kNoiseHigh = 0.7;

// Child seed streams of one repetition.
constexpr std::uint64_t kTruthStream = 0;
constexpr std::uint64_t kAcrStream = 1;
constexpr std::uint64_t kModelStreamBase = 16;

std::vector<std::string> sim_ids(std::size_t n) {
  std::vector<std::string> ids(n);
  const int width = static_cast<int>(std::to_string(n - 1).size());
  for (std::size_t k = 0; k < n; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%0*zu", width, k);
    ids[k] = buf;
  }
  return ids;
}

double observe(const GroundTruth& gt, std::size_t i, std::mt19937_64& rng, NoiseModel noise) {
  if (noise == NoiseModel::UniformAdditive)
    return gt.s_true[i] + std::uniform_real_distribution<double>(0.0, kNoiseHigh)(rng);
  if (gt.sigma_true[i] == 0.0) return gt.s_true[i];
  return std::normal_distribution<double>(gt.s_true[i], gt.sigma_true[i])(rng);
}

void validate(const SimulationConfig& c) {
  if (c.n < 2) throw UsageError("simulation needs n >= 2");
  if (c.reps < 1) throw UsageError("simulation needs reps >= 1");
  if (c.standard_trials < 1) throw UsageError("simulation needs trials >= 1");
  if (c.models.empty()) throw UsageError("simulation needs at least one model");
  if (c.acr_init && (c.acr_observers < 1 || c.acr_levels < 2))
    throw UsageError("ACR pre-pass needs observers >= 1 and levels >= 2");
}

double safe_srocc(std::span<const double> a, std::span<const double> b) {
  try {
    return srocc(a, b);
  } catch (const DataError&) {
    return 0.0;  // constant estimate: no ranking information
  }
}

}  // namespace

GroundTruth draw_ground_truth(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> score(kScoreLow, kScoreHigh);
  std::uniform_real_distribution<double> noise(0.0, kNoiseHigh);
  GroundTruth gt;
  gt.seed = seed;
  gt.s_true.resize(n);
  gt.sigma_true.resize(n);
  for (std::size_t k = 0; k < n; ++k) gt.s_true[k] = score(rng);
  for (std::size_t k = 0; k < n; ++k) gt.sigma_true[k] = noise(rng);
  return gt;
}

Outcome simulate_comparison(const GroundTruth& gt, std::size_t i, std::size_t j,
                            std::mt19937_64& rng, NoiseModel noise) {
  if (i >= gt.size() || j >= gt.size()) throw UsageError("stimulus index out of range");
  if (i == j) throw UsageError("a pair needs two distinct stimuli");
  const double ri = observe(gt, i, rng, noise);
  const double rj = observe(gt, j, rng, noise);
  if (ri > rj) return Outcome::FirstWins;
  if (rj > ri) return Outcome::SecondWins;
  if (gt.s_true[i] != gt.s_true[j] && gt.sigma_true[i] == 0.0 && gt.sigma_true[j] == 0.0)
    return gt.s_true[i] > gt.s_true[j] ? Outcome::FirstWins : Outcome::SecondWins;
  return std::bernoulli_distribution(0.5)(rng) ? Outcome::FirstWins : Outcome::SecondWins;
}

AcrRatingTable simulate_acr(const GroundTruth& gt, std::size_t observers, int levels,
                            std::mt19937_64& rng, NoiseModel noise) {
  if (levels < 2) throw UsageError("ACR scale needs at least two levels");
  const auto ids = sim_ids(gt.size());
  AcrRatingTable table(ids, std::make_pair(1.0, static_cast<double>(levels)));
  for (std::size_t o = 0; o < observers; ++o) {
    const std::string observer = "o" + std::to_string(o);
    for (std::size_t k = 0; k < gt.size(); ++k) {
      const double r = std::clamp(std::round(observe(gt, k, rng, noise)), 1.0,
                                  static_cast<double>(levels));
      table.add_rating(observer, ids[k], r);
    }
  }
  return table;
}

const ModelCurve& SimulationReport::curve(Model m) const {
  for (const auto& c : curves)
    if (c.model == m) return c;
  throw UsageError("model not in report: " + std::string(model_name(m)));
}

std::vector<std::vector<double>> simulate_repetition(const SimulationConfig& config,
                                                     std::size_t rep) {
  validate(config);
  const std::uint64_t rep_seed = mix_seed(config.seed, rep);
  const GroundTruth gt = draw_ground_truth(config.n, mix_seed(rep_seed, kTruthStream));
  const auto ids = sim_ids(config.n);
  const QuadratureRule rule = gauss_hermite_rule(config.quadrature_order);

  PairComparisonMatrix start(ids);
  if (config.acr_init) {
    std::mt19937_64 acr_rng(mix_seed(rep_seed, kAcrStream));
    start = pcm_from_acr(simulate_acr(gt, config.acr_observers, config.acr_levels, acr_rng,
                                      config.noise));
  }

  const std::size_t n = config.n;
  const std::size_t per_trial = n * (n - 1) / 2;
  std::vector<std::vector<double>> rows;
  rows.reserve(config.models.size());
  for (std::size_t mi = 0; mi < config.models.size(); ++mi) {
    const Model model = config.models[mi];
    // keyed by model, so a curve does not depend on which other models run
    const std::uint64_t model_seed =
        mix_seed(rep_seed, kModelStreamBase + static_cast<std::uint64_t>(model));
    std::mt19937_64 rng(model_seed);
    FitOptions fit = config.fit;
    int iteration = 0;
    fit.seed = mix_seed(model_seed, iteration);
    PairComparisonMatrix pcm = start;
    QualityEstimate est = fit_model(model, pcm, fit);
    std::vector<double> row;
    row.reserve(config.standard_trials);
    for (std::size_t t = 0; t < config.standard_trials; ++t) {
      std::size_t remaining = per_trial;
      while (remaining > 0) {
        const std::size_t k = std::min(n - 1, remaining);
        const SamplingBatch batch = select_batch(est, k, rule, config.batch_mode);
        for (const PairGain& p : batch.pairs) {
          if (simulate_comparison(gt, p.i, p.j, rng, config.noise) == Outcome::FirstWins)
            pcm.add(p.i, p.j, 1.0);
          else
            pcm.add(p.j, p.i, 1.0);
        }
        remaining -= k;
        fit.seed = mix_seed(model_seed, static_cast<std::uint64_t>(++iteration));
        est = fit_model(model, pcm, fit, &est);
      }
      row.push_back(safe_srocc(est.s_hat, gt.s_true));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ModelCurve> aggregate_curves(const std::vector<Model>& models,
                                         const std::vector<std::vector<std::vector<double>>>& rows) {
  if (rows.empty()) throw UsageError("no repetitions to aggregate");
  std::vector<ModelCurve> curves;
  for (std::size_t mi = 0; mi < models.size(); ++mi) {
    ModelCurve c{models[mi], {}};
    const std::size_t trials = rows.front().at(mi).size();
    for (std::size_t t = 0; t < trials; ++t) {
      std::vector<double> v;
      v.reserve(rows.size());
      for (const auto& rep : rows) v.push_back(rep.at(mi).at(t));
      // sorted summation: the result does not depend on repetition order
      std::sort(v.begin(), v.end());
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      c.trials.push_back({mean, sd});
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

SimulationReport run_simulation(const SimulationConfig& config) {
  validate(config);
  std::vector<std::vector<std::vector<double>>> rows(config.reps);
  parallel_for(
      config.reps, [&](std::size_t rep) { rows[rep] = simulate_repetition(config, rep); },
      config.threads);
  return SimulationReport{config, aggregate_curves(config.models, rows)};
}

Json report_to_json(const SimulationReport& report) {
  const SimulationConfig& c = report.config;
  Json models = Json::object();
  for (const auto& curve : report.curves) {
    Json trials = Json::array();
    for (const auto& t : curve.trials) trials.push_back(Json{{"mean", t.mean}, {"std", t.std}});
    models[std::string(model_name(curve.model))] = trials;
  }
  Json model_names = Json::array();
  for (Model m : c.models) model_names.push_back(std::string(model_name(m)));
  return Json{{"config",
               Json{{"n", c.n},
                    {"reps", c.reps},
                    {"trials", c.standard_trials},
                    {"models", model_names},
                    {"seed", c.seed},
                    {"acr_init", c.acr_init},
                    {"acr_observers", c.acr_observers},
                    {"acr_levels", c.acr_levels},
                    {"noise", c.noise == NoiseModel::Gaussian ? "gaussian" : "uniform"},
                    {"batch_mode", c.batch_mode == BatchMode::SpanningTree ? "tree" : "topk"},
                    {"quadrature_order", c.quadrature_order},
                    {"pseudocount", c.fit.pseudocount},
                    {"restarts", c.fit.restarts}}},
              {"models", models}};
}

std::string report_to_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "model,trial,mean,std\n";
  for (const auto& curve : report.curves)
    for (std::size_t t = 0; t < curve.trials.size(); ++t)
      out << model_name(curve.model) << ',' << (t + 1) << ',' << format_double(curve.trials[t].mean)
          << ',' << format_double(curve.trials[t].std) << '\n';
  return out.str();
}

}  // namespace qboost
