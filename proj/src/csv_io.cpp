#include "qboost/csv_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <vector>

#include "qboost/error.hpp"

namespace qboost {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& msg) {
  throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + msg);
}

// Reads a three-column CSV with the given header, calling row(fields, line).
template <typename Row>
void read_rows(std::istream& in, std::string_view source,
               const std::array<std::string_view, 3>& header, Row&& row) {
  std::string text;
  std::size_t line = 0;
  bool seen_header = false;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = text;
    if (line == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    std::array<std::string_view, 3> fields;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      const std::string_view f =
          trim(view.substr(start, comma == std::string_view::npos ? view.npos : comma - start));
      if (count < 3) fields[count] = f;
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (count != 3) fail(source, line, "expected 3 fields, found " + std::to_string(count));
    if (!seen_header) {
      if (fields != header)
        fail(source, line,
             "expected header " + std::string(header[0]) + "," + std::string(header[1]) + "," +
                 std::string(header[2]));
      seen_header = true;
      continue;
    }
    row(fields, line);
  }
  if (!seen_header) fail(source, line, "missing header");
}

double parse_number(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || field.empty())
    fail(source, line, "not a decimal number: '" + std::string(field) + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

AcrRatingTable read_acr_csv(std::istream& in, std::string_view source) {
  struct Row {
    std::string observer, stimulus;
    double rating;
    std::size_t line;
  };
  std::vector<Row> rows;
  read_rows(in, source, {"observer_id", "stimulus_id", "rating"},
            [&](const std::array<std::string_view, 3>& f, std::size_t line) {
              if (f[0].empty() || f[1].empty()) fail(source, line, "empty id");
              const double r = parse_number(f[2], source, line);
              if (!std::isfinite(r)) fail(source, line, "rating is not finite");
              rows.push_back({std::string(f[0]), std::string(f[1]), r, line});
            });
  if (rows.empty()) throw DataError(std::string(source) + ": no ratings");
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.stimulus);
  std::vector<Row> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Row& a, const Row& b) { return a.observer < b.observer; });
  AcrRatingTable table(std::vector<std::string>(ids.begin(), ids.end()));
  for (const auto& r : sorted) {
    try {
      table.add_rating(r.observer, r.stimulus, r.rating);
    } catch (const DataError& e) {
      fail(source, r.line, e.what());
    }
  }
  return table;
}

AcrRatingTable read_acr_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_acr_csv(in, path.string());
}

void write_acr_csv(std::ostream& out, const AcrRatingTable& table) {
  out << "observer_id,stimulus_id,rating\n";
  for (std::size_t o = 0; o < table.observer_count(); ++o) {
    const auto r = table.ratings_of(o);
    for (std::size_t s = 0; s < r.size(); ++s)
      if (r[s])
        out << table.observer_ids()[o] << ',' << table.stimulus_ids()[s] << ','
            << format_double(*r[s]) << '\n';
  }
}

PairComparisonMatrix read_pcm_csv(std::istream& in, std::string_view source) {
  std::map<std::pair<std::string, std::string>, double> entries;
  std::set<std::string> ids;
  read_rows(in, source, {"winner_id", "loser_id", "count"},
            [&](const std::array<std::string_view, 3>& f, std::size_t line) {
              if (f[0].empty() || f[1].empty()) fail(source, line, "empty id");
              if (f[0] == f[1]) fail(source, line, "winner and loser are the same stimulus");
              const double c = parse_number(f[2], source, line);
              if (!std::isfinite(c) || c < 0.0) fail(source, line, "count must be non-negative");
              std::string w(f[0]), l(f[1]);
              ids.insert(w);
              ids.insert(l);
              if (!entries.emplace(std::pair{w, l}, c).second)
                fail(source, line, "duplicate row for " + w + "," + l);
            });
  std::vector<std::string> id_list(ids.begin(), ids.end());
  PairComparisonMatrix pcm(id_list);
  for (const auto& [key, c] : entries) {
    const auto wi = std::lower_bound(id_list.begin(), id_list.end(), key.first) - id_list.begin();
    const auto li = std::lower_bound(id_list.begin(), id_list.end(), key.second) - id_list.begin();
    pcm.add(static_cast<std::size_t>(wi), static_cast<std::size_t>(li), c);
  }
  return pcm;
}

PairComparisonMatrix read_pcm_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_pcm_csv(in, path.string());
}

void write_pcm_csv(std::ostream& out, const PairComparisonMatrix& pcm) {
  const auto& ids = pcm.stimulus_ids();
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  out << "winner_id,loser_id,count\n";
  for (std::size_t i : order)
    for (std::size_t j : order)
      if (i != j && pcm.count(i, j) != 0.0)
        out << ids[i] << ',' << ids[j] << ',' << format_double(pcm.count(i, j)) << '\n';
}

void write_pcm_csv(const std::filesystem::path& path, const PairComparisonMatrix& pcm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_pcm_csv(out, pcm);
}

}  // namespace qboost
