// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Optional arguments restrict the run to criteria whose key contains
// one of them.

#include <boost/math/special_functions/gamma.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eig_oracle.hpp"
#include "qboost/hash.hpp"
#include "qboost/metrics.hpp"
#include "qboost/quadrature.hpp"
#include "qboost/sampler.hpp"
#include "qboost/simulation.hpp"
#include "qboost/thurstone.hpp"
#include "service_script.hpp"
#include "support.hpp"

using namespace qboost;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- simulation criteria -------------------------------------------------

SimulationConfig default_preset(std::size_t n, std::size_t reps) {
  SimulationConfig c;
  c.n = n;
  c.reps = reps;
  return c;
}

// Curves of the three models. Case III is only needed up to trial 15 and
// each model draws from its own stream, so truncating it changes nothing.
struct Curves {
  ModelCurve case3, case5, bt;
};

Curves simulate_curves(std::size_t n, std::size_t reps, std::size_t case3_trials) {
  SimulationConfig a = default_preset(n, reps);
  a.models = {Model::Case3};
  a.standard_trials = case3_trials;
  SimulationConfig b = default_preset(n, reps);
  b.models = {Model::Case5, Model::BradleyTerry};
  b.standard_trials = 50;
  const SimulationReport ra = run_simulation(a);
  const SimulationReport rb = run_simulation(b);
  return {ra.curve(Model::Case3), rb.curve(Model::Case5), rb.curve(Model::BradleyTerry)};
}

std::string curve_text(const ModelCurve& c) {
  std::string s;
  for (std::size_t t : {0u, 4u, 14u, 29u, 39u, 49u})
    if (t < c.trials.size()) s += fmt(" t%zu=%.4f", t + 1, c.trials[t].mean);
  return s;
}

// Models ranked by mean SROCC over trials 1..15.
std::string ordering(const Curves& c) {
  auto area = [](const ModelCurve& m) {
    double a = 0.0;
    for (std::size_t t = 0; t < 15; ++t) a += m.trials.at(t).mean;
    return a / 15.0;
  };
  std::vector<std::pair<double, std::string>> v = {
      {area(c.case3), "case3"}, {area(c.case5), "case5"}, {area(c.bt), "bt"}};
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  return v[0].second + ">" + v[1].second + ">" + v[2].second;
}

Curves& full_curves() {
  static Curves c = [] {
    const auto t0 = std::chrono::steady_clock::now();
    Curves r = simulate_curves(60, 100, 15);
    std::printf("# full preset simulated in %.0f s\n",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    std::printf("# case3:%s\n# case5:%s\n# bt:%s\n", curve_text(r.case3).c_str(),
                curve_text(r.case5).c_str(), curve_text(r.bt).c_str());
    return r;
  }();
  return c;
}

Verdict sim_case3_trial15() {
  const double v = full_curves().case3.trials.at(14).mean;
  return {v >= 0.95 - 0.02, fmt("case3 trial-15 mean SROCC %.4f (need >= 0.93)", v)};
}

Verdict sim_case5_lag() {
  const Curves& c = full_curves();
  const double level = c.case3.trials.at(14).mean;
  std::size_t first = 0;
  for (std::size_t t = 0; t < c.case5.trials.size(); ++t)
    if (c.case5.trials[t].mean >= level) {
      first = t + 1;
      break;
    }
  const bool pass = first == 0 || first >= 30;
  return {pass, first == 0 ? fmt("case5 never reaches %.4f within 50 trials", level)
                           : fmt("case5 first reaches %.4f at trial %zu (need >= 30)", level, first)};
}

Verdict sim_bt_ceiling() {
  double mx = -1.0;
  for (const auto& t : full_curves().bt.trials) mx = std::max(mx, t.mean);
  return {mx <= 0.90 + 0.03, fmt("bt max mean SROCC %.4f (need <= 0.93)", mx)};
}

Verdict sim_reduced_ordering() {
  const Curves reduced = simulate_curves(30, 30, 15);
  const std::string full = ordering(full_curves()), small = ordering(reduced);
  return {full == small && full == "case3>case5>bt",
          fmt("ordering by mean SROCC over trials 1-15: full %s, reduced %s (need both case3>case5>bt)",
              full.c_str(), small.c_str())};
}

Verdict acr_ablation() {
  SimulationConfig c = default_preset(60, 100);
  c.models = {Model::Case3};
  c.standard_trials = 1;
  const double without = run_simulation(c).curve(Model::Case3).trials[0].mean;
  c.acr_init = true;
  const double with = run_simulation(c).curve(Model::Case3).trials[0].mean;
  return {with - without >= 0.3,
          fmt("trial-1 mean SROCC with ACR %.4f, without %.4f, gap %.4f (need >= 0.3)", with,
              without, with - without)};
}

// ---- estimation criteria -------------------------------------------------

Verdict mle_consistency() {
  FitOptions mle;
  mle.pseudocount = 0.0;
  int passed = 0;
  std::string failures;
  double worst_sigma = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 10;
    const GroundTruth gt = draw_ground_truth(n, mix_seed(seed, 0));
    std::mt19937_64 rng(mix_seed(seed, 1));
    const QualityEstimate est =
        fit_thurstone_case3(test_support::draw_case3_counts(gt.s_true, gt.sigma_true, 10000, rng), mle);
    // estimates have unit root-mean-square sigma
    double ms = 0.0;
    for (double v : gt.sigma_true) ms += v * v;
    const double scale = std::sqrt(ms / n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err += std::abs(est.sigma_hat[i] - gt.sigma_true[i] / scale);
    err /= n;
    worst_sigma = std::max(worst_sigma, err);
    const double r = srocc(est.s_hat, gt.s_true);
    if (r == 1.0 && err < 0.1) {
      ++passed;
    } else {
      failures += fmt(" seed%llu(srocc %.6f, sigma err %.4f)", static_cast<unsigned long long>(seed), r, err);
    }
  }
  return {passed == 20, fmt("%d/20 seeds recover the order with mean |sigma err| < 0.1; worst sigma err %.4f;%s",
                            passed, worst_sigma, failures.empty() ? " no failures" : failures.c_str())};
}

Verdict gradient_suite() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = size(rng);
    const auto pcm = test_support::random_pcm(n, 0.0, 5.0, rng);
    const auto s = test_support::uniform_vector(n, -2.0, 2.0, rng);
    const auto sigma = test_support::uniform_vector(n, 0.3, 1.5, rng);
    std::vector<double> x = s;
    x.insert(x.end(), sigma.begin(), sigma.end());
    const auto g = log_likelihood_gradient(s, sigma, pcm);
    auto f = [&](const std::vector<double>& v) {
      return log_likelihood(std::span(v).first(n), std::span(v).subspan(n), pcm);
    };
    for (std::size_t k = 0; k < 2 * n; ++k) {
      const double analytic = k < n ? g.d_s[k] : g.d_sigma[k - n];
      worst = std::max(worst, test_support::relative_error(
                                  analytic, test_support::central_difference(f, x, k), 1e-4));
    }
    const auto gb = bt_log_likelihood_gradient(s, pcm);
    auto fb = [&](const std::vector<double>& v) { return bt_log_likelihood(v, pcm); };
    for (std::size_t k = 0; k < n; ++k)
      worst = std::max(worst, test_support::relative_error(
                                  gb[k], test_support::central_difference(fb, s, k), 1e-4));
  }
  return {worst < 1e-5, fmt("100 instances, max relative error %.2e (denominator floor 1e-4; need < 1e-5)", worst)};
}

// ---- sampler criteria ----------------------------------------------------

Verdict quadrature_suite() {
  const auto rule = gauss_hermite_rule(21);
  double worst_eig = 0.0;
  for (double m : test_support::kEigMeans)
    for (double sd : test_support::kEigStds)
      worst_eig = std::max(worst_eig, std::abs(pair_eig(test_support::two_stimulus_estimate(m, sd), 0, 1, rule) -
                                               test_support::eig_oracle(m, sd)));
  double worst_moment = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const auto r = gauss_hermite_rule(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      long double acc = 0.0L;
      for (std::size_t q = 0; q < r.order(); ++q)
        acc += static_cast<long double>(r.weights[q]) * std::pow(static_cast<long double>(r.nodes[q]), k);
      const double exact = k % 2 ? 0.0 : boost::math::tgamma(0.5 * (k + 1));
      worst_moment = std::max(worst_moment, std::abs(static_cast<double>(acc) - exact) / std::max(1.0, exact));
    }
  }
  return {worst_eig <= 1e-6 && worst_moment <= 1e-9,
          fmt("7x7 grid max |EIG - oracle| %.2e (need <= 1e-6); max moment error %.2e (need <= 1e-9)",
              worst_eig, worst_moment)};
}

Verdict eig_shape() {
  const auto rule = gauss_hermite_rule(21);
  double u[7][7];
  for (std::size_t a = 0; a < 7; ++a)
    for (std::size_t b = 0; b < 7; ++b)
      u[a][b] = pair_eig(test_support::two_stimulus_estimate(test_support::kEigMeans[a], test_support::kEigStds[b]),
                         0, 1, rule);
  int violations = 0;
  for (std::size_t a = 0; a < 7; ++a)
    for (std::size_t b = 0; b < 7; ++b) {
      if (a > 0 && u[a][b] > u[a - 1][b]) ++violations;
      if (b > 0 && u[a][b] < u[a][b - 1]) ++violations;
    }
  return {violations == 0, fmt("%d monotonicity violations on the 7x7 grid", violations)};
}

Verdict spanning_tree() {
  std::mt19937_64 rng(7);
  int matched = 0;
  bool deterministic = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto w = test_support::random_gains(n, rng, trial % 4 == 0);
    const auto batch = select_batch_from_gains(n, w, n - 1);
    double total = 0.0;
    for (const auto& e : batch.pairs) total += e.eig;
    if (batch.pairs.size() == n - 1 &&
        std::abs(total - test_support::best_tree_weight_exhaustive(n, w)) <= 1e-12)
      ++matched;
    for (int k = 0; k < 3; ++k) deterministic = deterministic && select_batch_from_gains(n, w, n - 1) == batch;
  }
  return {matched == 50 && deterministic,
          fmt("%d/50 trees match the exhaustive optimum; repeated runs %s", matched,
              deterministic ? "identical" : "differ")};
}

// ---- data criteria -------------------------------------------------------

Verdict acr_conservation() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> obs(1, 50), stim(2, 60);
  std::size_t tables = 0, pairs = 0, bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto acr = test_support::random_acr(trial == 0 ? 50 : obs(rng), trial == 0 ? 60 : stim(rng), rng);
    if (acr.table.empty()) continue;
    ++tables;
    const PairComparisonMatrix pcm = pcm_from_acr(acr.table);
    for (std::size_t i = 0; i < pcm.size(); ++i)
      for (std::size_t j = i + 1; j < pcm.size(); ++j) {
        double co = 0;
        for (std::size_t o = 0; o < acr.rated.size(); ++o) co += acr.rated[o][i] && acr.rated[o][j];
        ++pairs;
        bad += pcm.count(i, j) + pcm.count(j, i) != co;
      }
  }
  return {bad == 0, fmt("%zu tables, %zu pairs, %zu with mass != co-rating count", tables, pairs, bad)};
}

Verdict agreement_noiseless() {
  std::mt19937_64 rng(41);
  int runs = 0, perfect = 0;
  std::string failures;
  for (std::size_t n = 3; n <= 30; ++n) {
    const auto s = test_support::uniform_vector(n, 0.0, 10.0, rng);
    PairComparisonMatrix pcm(test_support::make_ids(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (s[i] > s[j]) pcm.add(i, j, 5.0);
    for (Model m : {Model::Case3, Model::Case5, Model::BradleyTerry}) {
      ++runs;
      const double p = agreement_proportion(pcm, fit_model(m, pcm, {}).s_hat).proportion;
      if (p == 1.0) ++perfect;
      else failures += fmt(" n%zu/%s=%.4f", n, std::string(model_name(m)).c_str(), p);
    }
  }
  return {perfect == runs, fmt("%d/%d fits (n 3..30, three models) give proportion 1.0;%s", perfect, runs,
                               failures.empty() ? " no failures" : failures.c_str())};
}

Verdict service_replay() {
  const auto root = std::filesystem::temp_directory_path() / "qboost-acceptance-service";
  const auto straight = test_support::run_scripted_study(root / "straight", false);
  const auto crashing = test_support::run_scripted_study(root / "crashing", true);
  std::filesystem::remove_all(root);
  const bool pass = straight.failures == 0 && crashing.failures == 0 && straight.digest == crashing.digest &&
                    straight.history == crashing.history;
  return {pass, fmt("%d requests, restart after each; digests %s, unexpected statuses %d/%d", crashing.requests,
                    straight.digest == crashing.digest ? "identical" : "differ", straight.failures,
                    crashing.failures)};
}

struct Criterion {
  const char* key;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"gradient-suite", gradient_suite},
      {"quadrature-suite", quadrature_suite},
      {"eig-shape", eig_shape},
      {"spanning-tree-oracle", spanning_tree},
      {"acr-conservation", acr_conservation},
      {"agreement-noiseless", agreement_noiseless},
      {"service-replay", service_replay},
      {"mle-consistency", mle_consistency},
      {"acr-init-ablation", acr_ablation},
      {"simulation-case3-trial15", sim_case3_trial15},
      {"simulation-case5-lag", sim_case5_lag},
      {"simulation-bt-ceiling", sim_bt_ceiling},
      {"simulation-reduced-ordering", sim_reduced_ordering},
  };
  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    bool selected = argc < 2;
    for (int a = 1; a < argc; ++a) selected = selected || std::string(c.key).find(argv[a]) != std::string::npos;
    if (!selected) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.key, v.detail.c_str(), secs);
    std::fflush(stdout);
    ++ran;
    failed += !v.pass;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
