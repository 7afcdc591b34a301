#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qboost/sampler.hpp"
#include "qboost/thurstone.hpp"

namespace qboost {

using Json = nlohmann::json;

// {model, stimulus_ids, s_hat, sigma_hat, covariance (row-major),
//  log_likelihood, converged, iterations}
Json estimate_to_json(const QualityEstimate& est);
QualityEstimate estimate_from_json(const Json& j);

// {iteration, stimulus_ids, pairs: [{i, j, eig}]}; i and j index stimulus_ids.
Json batch_to_json(const SamplingBatch& batch, const std::vector<std::string>& stimulus_ids);
SamplingBatch batch_from_json(const Json& j);

// Two-space indented, key-sorted, LF terminated.
std::string dump_canonical(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qboost
