#pragma once

// Scripted three-iteration study driven through the HTTP router, optionally
// dropping and reopening the store after every request.

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "qboost/study_service.hpp"

namespace qboost::test_support {

inline const std::map<std::string, double>& scripted_truth() {
  static const std::map<std::string, double> t = {
      {"v1", 3.9}, {"v2", 1.2}, {"v3", 2.6}, {"v4", 4.4}, {"v5", 2.0}};
  return t;
}

inline Json scripted_create_body() {
  return Json{{"acr_csv",
               "observer_id,stimulus_id,rating\n"
               "o1,v1,4\no1,v2,1\no1,v3,3\no1,v4,5\no1,v5,2\n"
               "o2,v1,4\no2,v2,2\no2,v3,2\no2,v4,4\no2,v5,2\n"
               "o3,v1,3\no3,v2,1\no3,v4,5\no3,v5,3\n"},
              {"config", Json{{"n_pc", 3}, {"n_itr", 3}, {"seed", 42}}}};
}

struct ScriptOutcome {
  std::string digest;
  std::string history;  // canonical JSON
  int requests = 0;
  int failures = 0;  // unexpected statuses
};

// Every outstanding pair answered by two annotators; the higher true score
// wins for "a1", the lower for "a2" on the first pair of each batch.
inline ScriptOutcome run_scripted_study(const std::filesystem::path& root, bool restart_every_step) {
  std::filesystem::remove_all(root);
  auto store = std::make_unique<StudyStore>(root);
  ScriptOutcome out;
  auto call = [&](const char* method, const std::string& path, const Json& body, int expect) {
    const HttpResult r = dispatch(*store, method, path, body.is_null() ? "" : body.dump());
    ++out.requests;
    if (r.status != expect) ++out.failures;
    if (restart_every_step) store = std::make_unique<StudyStore>(root);
    return r.body;
  };
  const std::string id = call("POST", "/studies", scripted_create_body(), 201).value("id", "");
  const std::string base = "/studies/" + id;
  for (int itr = 0; itr < 3; ++itr) {
    const Json batch = call("GET", base + "/batch", Json(), 200);
    bool first_pair = true;
    for (const auto& p : batch.value("pairs", Json::array())) {
      const std::string a = p.at("first"), b = p.at("second");
      const bool a_better = scripted_truth().at(a) > scripted_truth().at(b);
      for (const char* annotator : {"a1", "a2"}) {
        const bool contrarian = first_pair && std::string(annotator) == "a2";
        const bool pick_first = a_better != contrarian;
        call("POST", base + "/responses",
             Json{{"pair", {a, b}}, {"choice", pick_first ? "first" : "second"}, {"annotator", annotator}},
             200);
      }
      first_pair = false;
    }
    call("POST", base + "/advance", Json(), 200);
  }
  call("GET", base + "/batch", Json(), 423);
  out.digest = store->digest(id);
  out.history = dump_canonical(call("GET", base + "/history", Json(), 200));
  return out;
}

}  // namespace qboost::test_support
