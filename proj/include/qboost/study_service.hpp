#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qboost/fusion.hpp"
#include "qboost/json_io.hpp"

namespace qboost {

// Failure carrying an HTTP status: 404 unknown study, 409 conflict,
// 422 malformed request, 423 budget exhausted.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct PendingResponse {
  std::string annotator;
  std::size_t winner = 0;
  std::size_t loser = 0;
};

// Event-sourced study persistence. Layout per study:
//   <root>/<id>/events.log         one JSON event per line, append-only
//   <root>/<id>/snapshot-<itr>.json state after iteration <itr>
// Constructing a store replays every study found under root.
class StudyStore {
 public:
  explicit StudyStore(std::filesystem::path root);

  // body: {"stimulus_ids": [...]?, "acr_csv": "..."?, "config": {...}?}
  std::string create(const Json& body);
  // body: {"pair": [first, second], "choice": "first"|"second", "annotator": "..."}
  Json submit_response(const std::string& id, const Json& body);
  Json advance(const std::string& id);

  Json batch(const std::string& id) const;
  Json estimate(const std::string& id) const;
  Json history(const std::string& id) const;

  std::shared_ptr<const StudyState> state(const std::string& id) const;
  std::vector<PendingResponse> pending(const std::string& id) const;
  std::string digest(const std::string& id) const;
  std::vector<std::string> study_ids() const;

 private:
  struct Study {
    std::string id;
    std::filesystem::path dir;
    mutable std::mutex mu;
    std::shared_ptr<const StudyState> state;
    std::vector<PendingResponse> pending;
    std::size_t events = 0;  // lines in events.log
  };

  Study& find(const std::string& id) const;
  void load(const std::filesystem::path& dir);
  void append_event(Study& s, const Json& event);
  void write_snapshot(const Study& s) const;
  static void apply_response(Study& s, const Json& event);
  static void apply_advance(Study& s);

  std::filesystem::path root_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<Study>> studies_;
  std::size_t next_id_ = 1;
};

struct HttpResult {
  int status = 200;
  Json body;
};

// Routes one request. Never throws; failures become {"error": msg} bodies.
HttpResult dispatch(StudyStore& store, std::string_view method, std::string_view path,
                    std::string_view body);

// Blocks serving HTTP on host:port until the process stops.
void serve(StudyStore& store, const std::string& host, int port);

}  // namespace qboost
