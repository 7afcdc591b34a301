#include <cmath>
#include <fstream>
#include <sstream>

#include "qboost/error.hpp"
#include "qboost/json_io.hpp"

namespace qboost {

namespace {

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Json estimate_to_json(const QualityEstimate& est) {
  for (double v : est.covariance)
    if (!std::isfinite(v)) throw NumericalError("covariance is not finite");
  return Json{{"model", std::string(model_name(est.model))},
              {"stimulus_ids", est.stimulus_ids},
              {"s_hat", est.s_hat},
              {"sigma_hat", est.sigma_hat},
              {"covariance", est.covariance},
              {"log_likelihood", est.log_likelihood},
              {"converged", est.converged},
              {"iterations", est.iterations}};
}

QualityEstimate estimate_from_json(const Json& j) {
  QualityEstimate est;
  try {
    est.model = parse_model(field<std::string>(j, "model"));
  } catch (const UsageError& e) {
    throw DataError(e.what());
  }
  est.stimulus_ids = field<std::vector<std::string>>(j, "stimulus_ids");
  est.s_hat = field<std::vector<double>>(j, "s_hat");
  est.sigma_hat = field<std::vector<double>>(j, "sigma_hat");
  est.covariance = field<std::vector<double>>(j, "covariance");
  est.log_likelihood = field<double>(j, "log_likelihood");
  est.converged = field<bool>(j, "converged");
  if (j.contains("iterations")) est.iterations = field<int>(j, "iterations");
  const std::size_t n = est.stimulus_ids.size();
  if (est.s_hat.size() != n || est.sigma_hat.size() != n || est.covariance.size() != n * n)
    throw DataError("estimate arrays do not match the number of stimuli");
  for (double s : est.sigma_hat)
    if (!(s > 0.0)) throw DataError("sigma_hat must be positive");
  return est;
}

Json batch_to_json(const SamplingBatch& batch, const std::vector<std::string>& stimulus_ids) {
  Json pairs = Json::array();
  for (const auto& p : batch.pairs) pairs.push_back(Json{{"i", p.i}, {"j", p.j}, {"eig", p.eig}});
  return Json{{"iteration", batch.iteration}, {"stimulus_ids", stimulus_ids}, {"pairs", pairs}};
}

SamplingBatch batch_from_json(const Json& j) {
  SamplingBatch b;
  b.iteration = field<int>(j, "iteration");
  const auto pairs = field<Json>(j, "pairs");
  if (!pairs.is_array()) throw DataError("field 'pairs' must be an array");
  const std::size_t n = j.contains("stimulus_ids")
                            ? field<std::vector<std::string>>(j, "stimulus_ids").size()
                            : static_cast<std::size_t>(-1);
  for (const auto& p : pairs) {
    const PairGain g{field<std::size_t>(p, "i"), field<std::size_t>(p, "j"), field<double>(p, "eig")};
    if (g.i == g.j || g.i >= n || g.j >= n) throw DataError("batch pair indices are invalid");
    b.pairs.push_back(g);
  }
  return b;
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace qboost
