#include "qboost/fusion.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/hash.hpp"

namespace qboost {

namespace {

void validate(const LoopConfig& c, std::size_t n) {
  if (c.n_pc < 1) throw UsageError("n_pc must be >= 1");
  if (c.n_itr < 1) throw UsageError("n_itr must be >= 1");
  if (n < 2) throw DataError("at least two stimuli are required");
  if (c.n_pc > n * (n - 1) / 2) throw UsageError("batch exceeds pair universe");
  if (!(c.acr_weight >= 0.0)) throw UsageError("acr_weight must be non-negative");
}

FitOptions fit_options_for(const LoopConfig& c, int iteration) {
  FitOptions f = c.fit;
  f.seed = mix_seed(c.seed, static_cast<std::uint64_t>(iteration));
  return f;
}

SamplingBatch next_batch(const StudyState& s, const QuadratureRule& rule) {
  SamplingBatch b = select_batch(s.estimate, s.config.n_pc, rule, s.config.batch_mode);
  b.iteration = s.iteration + 1;
  return b;
}

}  // namespace

StudyState init_state_from_pcm(PairComparisonMatrix initial, const LoopConfig& config) {
  validate(config, initial.size());
  StudyState s;
  s.config = config;
  s.pcm = std::move(initial);
  s.estimate = fit_model(config.model, s.pcm, fit_options_for(config, 0));
  s.outstanding = next_batch(s, gauss_hermite_rule(config.quadrature_order));
  return s;
}

StudyState init_state(const std::optional<AcrRatingTable>& acr,
                      const std::vector<std::string>& stimulus_ids, const LoopConfig& config) {
  if (stimulus_ids.empty()) throw DataError("no stimuli");
  if (std::set<std::string>(stimulus_ids.begin(), stimulus_ids.end()).size() != stimulus_ids.size())
    throw DataError("duplicate stimulus id");
  PairComparisonMatrix pcm(stimulus_ids);
  if (config.use_acr_init) {
    if (!acr) throw DataError("ACR data required");
    const PairComparisonMatrix from_acr = pcm_from_acr(*acr);
    const auto& acr_ids = from_acr.stimulus_ids();
    std::vector<std::size_t> map(acr_ids.size());
    for (std::size_t a = 0; a < acr_ids.size(); ++a) {
      const auto idx = pcm.index_of(acr_ids[a]);
      if (!idx) throw DataError("ACR stimulus not in the study: " + acr_ids[a]);
      map[a] = *idx;
    }
    for (std::size_t a = 0; a < acr_ids.size(); ++a)
      for (std::size_t b = 0; b < acr_ids.size(); ++b)
        if (a != b && from_acr.count(a, b) > 0.0)
          pcm.add(map[a], map[b], config.acr_weight * from_acr.count(a, b));
  }
  return init_state_from_pcm(std::move(pcm), config);
}

StudyState step(const StudyState& state, const PairComparisonMatrix& responses) {
  if (state.budget_exhausted()) throw UsageError("budget exhausted");
  if (responses.stimulus_ids() != state.pcm.stimulus_ids()) throw DataError("incompatible matrices");
  const std::size_t n = state.pcm.size();
  std::vector<char> issued(n * n, 0);
  for (const auto& p : state.outstanding.pairs) issued[p.i * n + p.j] = issued[p.j * n + p.i] = 1;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (responses.count(i, j) > 0.0 && !issued[i * n + j])
        throw DataError("unsolicited response for " + state.pcm.stimulus_ids()[i] + " vs " +
                        state.pcm.stimulus_ids()[j]);

  StudyState next;
  next.config = state.config;
  next.pcm = pcm_merge(state.pcm, responses);
  next.iteration = state.iteration + 1;
  next.estimate = responses.total_mass() == 0.0
                      ? state.estimate
                      : fit_model(state.config.model, next.pcm,
                                  fit_options_for(state.config, next.iteration), &state.estimate);
  next.history = state.history;
  next.history.push_back({next.iteration, state.outstanding, pcm_digest(next.pcm), next.estimate});
  if (!next.budget_exhausted()) {
    next.outstanding = next_batch(next, gauss_hermite_rule(state.config.quadrature_order));
  } else {
    next.outstanding = SamplingBatch{next.iteration + 1, {}};
  }
  return next;
}

PairComparisonMatrix empty_responses(const StudyState& state) {
  return PairComparisonMatrix(state.pcm.stimulus_ids());
}

Json loop_config_to_json(const LoopConfig& c) {
  return Json{{"n_pc", c.n_pc},
              {"n_itr", c.n_itr},
              {"model", std::string(model_name(c.model))},
              {"pseudocount", c.fit.pseudocount},
              {"gradient_tolerance", c.fit.gradient_tolerance},
              {"max_iterations", c.fit.max_iterations},
              {"restarts", c.fit.restarts},
              {"quadrature_order", c.quadrature_order},
              {"use_acr_init", c.use_acr_init},
              {"acr_weight", c.acr_weight},
              {"batch_mode", c.batch_mode == BatchMode::SpanningTree ? "tree" : "topk"},
              {"seed", c.seed}};
}

LoopConfig loop_config_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("loop config must be an object");
  LoopConfig c;
  try {
    if (j.contains("n_pc")) c.n_pc = j.at("n_pc").get<std::size_t>();
    if (j.contains("n_itr")) c.n_itr = j.at("n_itr").get<int>();
    if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
    if (j.contains("pseudocount")) c.fit.pseudocount = j.at("pseudocount").get<double>();
    if (j.contains("gradient_tolerance"))
      c.fit.gradient_tolerance = j.at("gradient_tolerance").get<double>();
    if (j.contains("max_iterations")) c.fit.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("restarts")) c.fit.restarts = j.at("restarts").get<int>();
    if (j.contains("quadrature_order")) c.quadrature_order = j.at("quadrature_order").get<int>();
    if (j.contains("use_acr_init")) c.use_acr_init = j.at("use_acr_init").get<bool>();
    if (j.contains("acr_weight")) c.acr_weight = j.at("acr_weight").get<double>();
    if (j.contains("batch_mode")) {
      const auto m = j.at("batch_mode").get<std::string>();
      if (m == "tree") c.batch_mode = BatchMode::SpanningTree;
      else if (m == "topk") c.batch_mode = BatchMode::GlobalTopK;
      else throw DataError("unknown batch mode: " + m);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed loop config: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  return c;
}

Json history_to_json(const StudyState& state) {
  Json iterations = Json::array();
  for (const auto& rec : state.history) {
    iterations.push_back(Json{
        {"iteration", rec.iteration},
        {"batch", batch_to_json(rec.batch, state.pcm.stimulus_ids())["pairs"]},
        {"pcm_digest", rec.pcm_digest},
        {"estimate",
         Json{{"s_hat", rec.estimate.s_hat},
              {"sigma_hat", rec.estimate.sigma_hat},
              {"log_likelihood", rec.estimate.log_likelihood},
              {"converged", rec.estimate.converged}}},
    });
  }
  return Json{{"stimulus_ids", state.pcm.stimulus_ids()},
              {"model", std::string(model_name(state.config.model))},
              {"n_pc", state.config.n_pc},
              {"n_itr", state.config.n_itr},
              {"iterations", iterations}};
}

Json state_to_json(const StudyState& state) {
  std::ostringstream pcm_csv;
  write_pcm_csv(pcm_csv, state.pcm);
  return Json{{"iteration", state.iteration},
              {"pcm_digest", pcm_digest(state.pcm)},
              {"pcm", pcm_csv.str()},
              {"estimate", estimate_to_json(state.estimate)},
              {"outstanding", batch_to_json(state.outstanding, state.pcm.stimulus_ids())},
              {"history", history_to_json(state)}};
}

Json state_snapshot_json(const StudyState& state) {
  std::ostringstream pcm_csv;
  write_pcm_csv(pcm_csv, state.pcm);
  Json history = Json::array();
  for (const auto& rec : state.history)
    history.push_back(Json{{"iteration", rec.iteration},
                           {"batch", batch_to_json(rec.batch, state.pcm.stimulus_ids())},
                           {"pcm_digest", rec.pcm_digest},
                           {"estimate", estimate_to_json(rec.estimate)}});
  return Json{{"config", loop_config_to_json(state.config)},
              {"stimulus_ids", state.pcm.stimulus_ids()},
              {"pcm", pcm_csv.str()},
              {"iteration", state.iteration},
              {"estimate", estimate_to_json(state.estimate)},
              {"outstanding", batch_to_json(state.outstanding, state.pcm.stimulus_ids())},
              {"history", history}};
}

StudyState state_from_snapshot(const Json& j) {
  try {
    StudyState s;
    s.config = loop_config_from_json(j.at("config"));
    const auto ids = j.at("stimulus_ids").get<std::vector<std::string>>();
    std::istringstream pcm_csv(j.at("pcm").get<std::string>());
    const PairComparisonMatrix parsed = read_pcm_csv(pcm_csv, "<snapshot>");
    // the CSV omits stimuli without mass; re-home counts onto the full id list
    s.pcm = PairComparisonMatrix(ids);
    for (std::size_t a = 0; a < parsed.size(); ++a)
      for (std::size_t b = 0; b < parsed.size(); ++b)
        if (a != b && parsed.count(a, b) > 0.0) {
          const auto ia = s.pcm.index_of(parsed.stimulus_ids()[a]);
          const auto ib = s.pcm.index_of(parsed.stimulus_ids()[b]);
          if (!ia || !ib) throw DataError("snapshot matrix names an unknown stimulus");
          s.pcm.add(*ia, *ib, parsed.count(a, b));
        }
    s.iteration = j.at("iteration").get<int>();
    s.estimate = estimate_from_json(j.at("estimate"));
    s.outstanding = batch_from_json(j.at("outstanding"));
    for (const auto& rec : j.at("history"))
      s.history.push_back({rec.at("iteration").get<int>(), batch_from_json(rec.at("batch")),
                           rec.at("pcm_digest").get<std::string>(),
                           estimate_from_json(rec.at("estimate"))});
    return s;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed snapshot: ") + e.what());
  }
}

std::string state_digest(const StudyState& state) {
  return to_hex(fnv1a64(state_to_json(state).dump()));
}

}  // namespace qboost
