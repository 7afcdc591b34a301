#include "qboost/study_service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "qboost/csv_io.hpp"
#include "qboost/error.hpp"
#include "qboost/hash.hpp"

namespace qboost {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kIdPrefix = "study-";

std::string format_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "study-%06zu", k);
  return buf;
}

StudyState initial_state(const Json& create) {
  const LoopConfig config =
      loop_config_from_json(create.contains("config") ? create.at("config") : Json::object());
  std::optional<AcrRatingTable> acr;
  if (create.contains("acr_csv")) {
    std::istringstream in(create.at("acr_csv").get<std::string>());
    acr = read_acr_csv(in, "acr_csv");
  }
  std::vector<std::string> ids;
  if (create.contains("stimulus_ids")) {
    ids = create.at("stimulus_ids").get<std::vector<std::string>>();
  } else if (acr) {
    ids = acr->stimulus_ids();
  } else {
    throw DataError("stimulus_ids or acr_csv required");
  }
  return init_state(acr, ids, config);
}

// Left/right order of one pair, fixed per (study, iteration, pair).
bool swap_presentation(const std::string& study, int iteration, std::size_t i, std::size_t j) {
  const std::uint64_t h = mix_seed(mix_seed(fnv1a64(study), static_cast<std::uint64_t>(iteration)),
                                   static_cast<std::uint64_t>(i) << 32 | j);
  return (h & 1) != 0;
}

void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw DataError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

const std::string& string_field(const Json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string())
    throw ServiceError(422, std::string("missing string field: ") + key);
  return body.at(key).get_ref<const std::string&>();
}

}  // namespace

StudyStore::StudyStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root_))
    if (entry.is_directory() && entry.path().filename().string().starts_with(kIdPrefix))
      dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) load(d);
}

void StudyStore::load(const fs::path& dir) {
  std::vector<Json> events;
  {
    std::ifstream in(dir / "events.log");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Json e = Json::parse(line, nullptr, false);
      if (e.is_discarded()) break;  // torn final write
      events.push_back(std::move(e));
    }
  }
  if (events.empty()) return;

  auto s = std::make_unique<Study>();
  s->id = dir.filename().string();
  s->dir = dir;

  // latest snapshot covered by the log
  Json best;
  int best_itr = -1;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!name.starts_with("snapshot-") || entry.path().extension() != ".json") continue;
    Json snap = Json::parse(std::ifstream(entry.path()), nullptr, false);
    if (snap.is_discarded() || !snap.contains("events_applied")) continue;
    const auto applied = snap.at("events_applied").get<std::size_t>();
    const int itr = snap.at("state").at("iteration").get<int>();
    if (applied <= events.size() && itr > best_itr) {
      best_itr = itr;
      best = std::move(snap);
    }
  }

  std::size_t k = 0;
  if (best_itr >= 0) {
    s->state = std::make_shared<const StudyState>(state_from_snapshot(best.at("state")));
    for (const auto& p : best.at("pending"))
      s->pending.push_back({p.at("annotator").get<std::string>(), p.at("winner").get<std::size_t>(),
                            p.at("loser").get<std::size_t>()});
    k = best.at("events_applied").get<std::size_t>();
  } else {
    s->state = std::make_shared<const StudyState>(initial_state(events.front().at("body")));
    k = 1;
  }
  for (; k < events.size(); ++k) {
    const auto& type = events[k].at("type").get_ref<const std::string&>();
    if (type == "response") apply_response(*s, events[k]);
    else if (type == "advance") apply_advance(*s);
  }
  s->events = events.size();

  const std::string& id = s->id;
  const auto num = std::stoull(id.substr(kIdPrefix.size()));
  next_id_ = std::max<std::size_t>(next_id_, num + 1);
  studies_.emplace(id, std::move(s));
}

StudyStore::Study& StudyStore::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = studies_.find(id);
  if (it == studies_.end()) throw ServiceError(404, "unknown study: " + id);
  return *it->second;
}

void StudyStore::append_event(Study& s, const Json& event) {
  std::ofstream out(s.dir / "events.log", std::ios::app | std::ios::binary);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw ServiceError(500, "cannot append to event log");
  ++s.events;
}

void StudyStore::write_snapshot(const Study& s) const {
  Json pending = Json::array();
  for (const auto& p : s.pending)
    pending.push_back(Json{{"annotator", p.annotator}, {"winner", p.winner}, {"loser", p.loser}});
  const Json snap{{"events_applied", s.events},
                  {"state", state_snapshot_json(*s.state)},
                  {"pending", pending}};
  write_atomically(s.dir / ("snapshot-" + std::to_string(s.state->iteration) + ".json"),
                   snap.dump());
}

void StudyStore::apply_response(Study& s, const Json& event) {
  s.pending.push_back({event.at("annotator").get<std::string>(),
                       event.at("winner").get<std::size_t>(), event.at("loser").get<std::size_t>()});
}

void StudyStore::apply_advance(Study& s) {
  PairComparisonMatrix responses = empty_responses(*s.state);
  for (const auto& p : s.pending) responses.add(p.winner, p.loser, 1.0);
  s.state = std::make_shared<const StudyState>(step(*s.state, responses));
  s.pending.clear();
}

std::string StudyStore::create(const Json& body) {
  if (!body.is_object()) throw ServiceError(422, "body must be a JSON object");
  StudyState st;
  try {
    st = initial_state(body);
  } catch (const Json::exception& e) {
    throw ServiceError(422, e.what());
  } catch (const UsageError& e) {
    throw ServiceError(422, e.what());
  } catch (const DataError& e) {
    throw ServiceError(422, e.what());
  }

  std::unique_lock lock(mu_);
  auto s = std::make_unique<Study>();
  s->id = format_id(next_id_++);
  s->dir = root_ / s->id;
  fs::create_directories(s->dir);
  s->state = std::make_shared<const StudyState>(std::move(st));
  append_event(*s, Json{{"type", "create"}, {"body", body}});
  write_snapshot(*s);
  const std::string id = s->id;
  studies_.emplace(id, std::move(s));
  return id;
}

Json StudyStore::submit_response(const std::string& id, const Json& body) {
  Study& s = find(id);
  if (!body.is_object()) throw ServiceError(422, "body must be a JSON object");
  const auto& pair = body.contains("pair") ? body.at("pair") : Json();
  if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
    throw ServiceError(422, "pair must be [first, second] stimulus ids");
  const std::string& choice = string_field(body, "choice");
  if (choice != "first" && choice != "second")
    throw ServiceError(422, "choice must be \"first\" or \"second\"");
  const std::string& annotator = string_field(body, "annotator");
  if (annotator.empty()) throw ServiceError(422, "annotator must be non-empty");

  std::lock_guard lock(s.mu);
  const StudyState& st = *s.state;
  if (st.budget_exhausted()) throw ServiceError(423, "study budget exhausted");
  const auto a = st.pcm.index_of(pair[0].get<std::string>());
  const auto b = st.pcm.index_of(pair[1].get<std::string>());
  if (!a || !b) throw ServiceError(422, "unknown stimulus in pair");
  const bool outstanding = std::any_of(st.outstanding.pairs.begin(), st.outstanding.pairs.end(),
                                       [&](const PairGain& p) {
                                         return (p.i == *a && p.j == *b) || (p.i == *b && p.j == *a);
                                       });
  if (!outstanding) throw ServiceError(409, "pair is not outstanding");
  const bool duplicate = std::any_of(s.pending.begin(), s.pending.end(), [&](const auto& p) {
    return p.annotator == annotator &&
           ((p.winner == *a && p.loser == *b) || (p.winner == *b && p.loser == *a));
  });
  if (duplicate) throw ServiceError(409, "duplicate response for this annotator and pair");

  const std::size_t winner = choice == "first" ? *a : *b;
  const std::size_t loser = choice == "first" ? *b : *a;
  const Json event{{"type", "response"},  {"iteration", st.iteration}, {"annotator", annotator},
                   {"winner", winner},    {"loser", loser}};
  append_event(s, event);
  apply_response(s, event);
  return Json{{"accepted", true},
              {"iteration", st.iteration + 1},
              {"winner", st.pcm.stimulus_ids()[winner]},
              {"loser", st.pcm.stimulus_ids()[loser]}};
}

Json StudyStore::advance(const std::string& id) {
  Study& s = find(id);
  std::lock_guard lock(s.mu);
  if (s.state->budget_exhausted()) throw ServiceError(423, "study budget exhausted");
  const std::size_t merged = s.pending.size();
  append_event(s, Json{{"type", "advance"}, {"iteration", s.state->iteration}});
  apply_advance(s);
  write_snapshot(s);
  return Json{{"iteration", s.state->iteration},
              {"merged_responses", merged},
              {"budget_exhausted", s.state->budget_exhausted()},
              {"pcm_digest", pcm_digest(s.state->pcm)}};
}

std::shared_ptr<const StudyState> StudyStore::state(const std::string& id) const {
  Study& s = find(id);
  std::lock_guard lock(s.mu);
  return s.state;
}

std::vector<PendingResponse> StudyStore::pending(const std::string& id) const {
  Study& s = find(id);
  std::lock_guard lock(s.mu);
  return s.pending;
}

Json StudyStore::batch(const std::string& id) const {
  Study& s = find(id);
  std::shared_ptr<const StudyState> st;
  std::vector<PendingResponse> pending;
  {
    std::lock_guard lock(s.mu);
    st = s.state;
    pending = s.pending;
  }
  if (st->budget_exhausted()) throw ServiceError(423, "study budget exhausted");
  const auto& ids = st->pcm.stimulus_ids();
  Json pairs = Json::array();
  for (const PairGain& p : st->outstanding.pairs) {
    const bool swap = swap_presentation(s.id, st->outstanding.iteration, p.i, p.j);
    const std::size_t first = swap ? p.j : p.i, second = swap ? p.i : p.j;
    const auto answered = std::count_if(pending.begin(), pending.end(), [&](const auto& r) {
      return (r.winner == p.i && r.loser == p.j) || (r.winner == p.j && r.loser == p.i);
    });
    pairs.push_back(Json{{"first", ids[first]},
                         {"second", ids[second]},
                         {"eig", p.eig},
                         {"responses", answered}});
  }
  return Json{{"study", s.id},
              {"iteration", st->outstanding.iteration},
              {"completed_iterations", st->iteration},
              {"n_itr", st->config.n_itr},
              {"pairs", pairs}};
}

Json StudyStore::estimate(const std::string& id) const {
  const auto st = state(id);
  Json j = estimate_to_json(st->estimate);
  std::vector<double> var(st->estimate.size());
  for (std::size_t k = 0; k < var.size(); ++k) var[k] = st->estimate.cov(k, k);
  j["score_variance"] = var;
  j["iteration"] = st->iteration;
  return j;
}

Json StudyStore::history(const std::string& id) const { return history_to_json(*state(id)); }

std::string StudyStore::digest(const std::string& id) const { return state_digest(*state(id)); }

std::vector<std::string> StudyStore::study_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : studies_) ids.push_back(id);
  return ids;
}

HttpResult dispatch(StudyStore& store, std::string_view method, std::string_view path,
                    std::string_view body) {
  static const std::regex kStudy(R"(^/studies/([A-Za-z0-9_-]+)/(batch|responses|advance|estimate|history)$)");
  auto parse_body = [&]() {
    Json j = Json::parse(body, nullptr, false);
    if (j.is_discarded()) throw ServiceError(422, "body is not valid JSON");
    return j;
  };
  try {
    const std::string p(path);
    if (p == "/studies") {
      if (method != "POST") return {405, Json{{"error", "method not allowed"}}};
      return {201, Json{{"id", store.create(parse_body())}}};
    }
    std::smatch m;
    if (!std::regex_match(p, m, kStudy)) return {404, Json{{"error", "no such endpoint"}}};
    const std::string id = m[1], action = m[2];
    const bool post = action == "responses" || action == "advance";
    if ((method == "POST") != post) return {405, Json{{"error", "method not allowed"}}};
    if (action == "batch") return {200, store.batch(id)};
    if (action == "estimate") return {200, store.estimate(id)};
    if (action == "history") return {200, store.history(id)};
    if (action == "responses") return {200, store.submit_response(id, parse_body())};
    return {200, store.advance(id)};
  } catch (const ServiceError& e) {
    return {e.status(), Json{{"error", e.what()}}};
  } catch (const Error& e) {
    return {e.kind() == ErrorKind::Numerical ? 500 : 422, Json{{"error", e.what()}}};
  } catch (const std::exception& e) {
    return {500, Json{{"error", e.what()}}};
  }
}

void serve(StudyStore& store, const std::string& host, int port) {
  httplib::Server server;
  auto handler = [&store](const httplib::Request& req, httplib::Response& res) {
    const HttpResult r = dispatch(store, req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  if (!server.listen(host, port)) throw UsageError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace qboost
