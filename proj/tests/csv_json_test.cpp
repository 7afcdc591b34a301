#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/json_io.hpp"
#include "qboost/sampler.hpp"
#include "support.hpp"

using namespace qboost;

namespace {

PairComparisonMatrix parse_pcm(const std::string& text) {
  std::istringstream in(text);
  return read_pcm_csv(in, "t.csv");
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int k = 0; k < 2000; ++k) {
    const double v = d(rng) * std::pow(10.0, (k % 40) - 20);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(3), "3");
  EXPECT_EQ(format_double(-0.0), "0");
}

TEST(PcmCsv, RoundTripIsLossless) {
  std::mt19937_64 rng(9);
  auto pcm = test_support::random_pcm(7, 0, 4, rng);
  std::ostringstream out;
  write_pcm_csv(out, pcm);
  EXPECT_EQ(parse_pcm(out.str()), pcm);
}

TEST(PcmCsv, ReadsHeaderBomAndCrlf) {
  const auto p = parse_pcm("\xEF\xBB\xBFwinner_id,loser_id,count\r\nb,a,2\r\n\r\na,c,+0.5\r\n");
  EXPECT_EQ(p.stimulus_ids(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(p.count(1, 0), 2.0);
  EXPECT_EQ(p.count(0, 2), 0.5);
}

TEST(PcmCsv, ErrorsCarrySourceAndLine) {
  EXPECT_EQ(error_of([] { parse_pcm("a,b,c\n"); }),
            "t.csv:1: expected header winner_id,loser_id,count");
  EXPECT_EQ(error_of([] { parse_pcm("winner_id,loser_id,count\na,b,x\n"); }),
            "t.csv:2: not a decimal number: 'x'");
  EXPECT_EQ(error_of([] { parse_pcm("winner_id,loser_id,count\na,a,1\n"); }),
            "t.csv:2: winner and loser are the same stimulus");
  EXPECT_EQ(error_of([] { parse_pcm("winner_id,loser_id,count\na,b,-1\n"); }),
            "t.csv:2: count must be non-negative");
  EXPECT_EQ(error_of([] { parse_pcm("winner_id,loser_id,count\na,b,1\na,b,2\n"); }),
            "t.csv:3: duplicate row for a,b");
  EXPECT_EQ(error_of([] { parse_pcm("winner_id,loser_id,count\na,b\n"); }),
            "t.csv:2: expected 3 fields, found 2");
  EXPECT_EQ(error_of([] { parse_pcm(""); }), "t.csv:0: missing header");
}

TEST(AcrCsv, RoundTripAndDuplicates) {
  std::istringstream in("observer_id,stimulus_id,rating\no1,b,4\no1,a,2\no2,a,5\n");
  const AcrRatingTable t = read_acr_csv(in, "acr");
  EXPECT_EQ(t.stimulus_ids(), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.rating_count(), 3u);
  std::ostringstream out;
  write_acr_csv(out, t);
  std::istringstream back(out.str());
  const AcrRatingTable u = read_acr_csv(back, "acr2");
  EXPECT_EQ(pcm_from_acr(u), pcm_from_acr(t));

  std::istringstream dup("observer_id,stimulus_id,rating\no1,a,1\no1,a,2\n");
  EXPECT_EQ(error_of([&] { read_acr_csv(dup, "d"); }),
            "d:3: duplicate rating for observer o1, stimulus a");
}

TEST(EstimateJson, RoundTripIsExact) {
  QualityEstimate e;
  e.model = Model::Case5;
  e.stimulus_ids = {"a", "b"};
  e.s_hat = {0.1 + 0.2, -(0.1 + 0.2)};
  e.sigma_hat = {1 / 3.0, 2 / 3.0};
  e.covariance = {1e-17, -3.3, -3.3, 0.7};
  e.log_likelihood = -12.345678901234567;
  e.converged = true;
  e.iterations = 7;
  EXPECT_EQ(estimate_from_json(Json::parse(dump_canonical(estimate_to_json(e)))), e);
}

TEST(EstimateJson, RejectsMalformed) {
  Json j = Json{{"model", "case3"}, {"stimulus_ids", {"a"}}, {"s_hat", {0.0}}, {"sigma_hat", {1.0}},
                {"covariance", {1.0}}, {"log_likelihood", 0.0}, {"converged", true}};
  EXPECT_NO_THROW(estimate_from_json(j));
  Json bad = j;
  bad["model"] = "case7";
  EXPECT_THROW(estimate_from_json(bad), DataError);
  bad = j;
  bad["sigma_hat"] = {0.0};
  EXPECT_THROW(estimate_from_json(bad), DataError);
  bad = j;
  bad["s_hat"] = {0.0, 1.0};
  EXPECT_THROW(estimate_from_json(bad), DataError);
  bad = j;
  bad.erase("converged");
  EXPECT_THROW(estimate_from_json(bad), DataError);
  bad = j;
  bad["log_likelihood"] = "x";
  EXPECT_THROW(estimate_from_json(bad), DataError);
}

TEST(BatchJson, RoundTripAndValidation) {
  SamplingBatch b{3, {{0, 2, 0.25}, {1, 2, 0.125}}};
  const std::vector<std::string> ids = {"a", "b", "c"};
  EXPECT_EQ(batch_from_json(Json::parse(dump_canonical(batch_to_json(b, ids)))), b);
  Json j = batch_to_json(b, ids);
  j["pairs"][0]["j"] = 3;
  EXPECT_THROW(batch_from_json(j), DataError);
  j["pairs"][0]["j"] = 0;
  EXPECT_THROW(batch_from_json(j), DataError);
}

TEST(CanonicalJson, SortedKeysAndTrailingNewline) {
  const std::string s = dump_canonical(Json{{"b", 1}, {"a", {{"d", 2}, {"c", 3}}}});
  EXPECT_EQ(s, "{\n  \"a\": {\n    \"c\": 3,\n    \"d\": 2\n  },\n  \"b\": 1\n}\n");
}
