#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qboost/json_io.hpp"
#include "qboost/pcm.hpp"
#include "qboost/sampler.hpp"
#include "qboost/thurstone.hpp"

namespace qboost {

// Budget: n_pc pairs per iteration for n_itr iterations.
struct LoopConfig {
  std::size_t n_pc = 1;
  int n_itr = 1;
  Model model = Model::Case3;
  FitOptions fit;
  int quadrature_order = kDefaultQuadratureOrder;
  bool use_acr_init = true;
  // Mass of one ACR-derived preference relative to one pairwise judgment.
  double acr_weight = 1.0;
  BatchMode batch_mode = BatchMode::SpanningTree;
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iteration = 0;
  SamplingBatch batch;     // the batch answered in this iteration
  std::string pcm_digest;  // after the merge
  QualityEstimate estimate;
};

struct StudyState {
  LoopConfig config;
  PairComparisonMatrix pcm;
  int iteration = 0;  // completed iterations
  QualityEstimate estimate;
  SamplingBatch outstanding;  // empty once the budget is spent
  std::vector<IterationRecord> history;

  bool budget_exhausted() const noexcept { return iteration >= config.n_itr; }
};

// Starting state: ACR-derived PCM (when enabled) or zeros, fitted, with the
// first batch issued. Throws DataError("ACR data required") when ACR
// initialisation is requested without ratings.
StudyState init_state(const std::optional<AcrRatingTable>& acr,
                      const std::vector<std::string>& stimulus_ids, const LoopConfig& config);

// Same, starting from an explicit matrix.
StudyState init_state_from_pcm(PairComparisonMatrix initial, const LoopConfig& config);

// One iteration: merge the answers to the outstanding batch, refit from the
// previous estimate, issue the next batch. Empty responses leave the
// estimate unchanged.
StudyState step(const StudyState& state, const PairComparisonMatrix& responses);

// Zero matrix over the state's stimuli, for building responses.
PairComparisonMatrix empty_responses(const StudyState& state);

Json loop_config_to_json(const LoopConfig& config);
// Missing fields keep their defaults. Throws DataError on malformed input.
LoopConfig loop_config_from_json(const Json& j);

Json history_to_json(const StudyState& state);
// Lossless form, restorable with state_from_snapshot.
Json state_snapshot_json(const StudyState& state);
StudyState state_from_snapshot(const Json& j);
Json state_to_json(const StudyState& state);
std::string state_digest(const StudyState& state);

}  // namespace qboost
