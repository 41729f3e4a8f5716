#include "adaptrank/run_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "adaptrank/error.hpp"

namespace adaptrank {

std::vector<std::string> RunFile::query_ids() const {
  std::vector<std::string> ids;
  for (const auto& [q, entries] : queries) ids.push_back(q);
  return ids;
}

CandidateLists RunFile::candidates(std::size_t depth) const {
  CandidateLists out;
  for (const auto& [q, entries] : queries) {
    auto& list = out[q];
    for (std::size_t i = 0; i < entries.size() && i < depth; ++i) list.push_back(entries[i].doc_id);
  }
  return out;
}

RunFile RunFile::restricted_to(const std::vector<std::string>& query_ids) const {
  RunFile out;
  out.tag = tag;
  for (const auto& q : query_ids) {
    if (auto it = queries.find(q); it != queries.end()) out.queries.emplace(q, it->second);
  }
  return out;
}

void add_ranking(RunFile& run, const std::string& query_id, const std::vector<ScoredDoc>& docs) {
  std::vector<RunEntry> entries;
  entries.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) entries.push_back({docs[i].doc_id, docs[i].score, i + 1});
  run.queries[query_id] = std::move(entries);
  check_run(run.restricted_to({query_id}));
}

RunFile run_from_lists(const std::vector<ScoredList>& lists, std::string tag) {
  RunFile run;
  run.tag = std::move(tag);
  for (const auto& list : lists) {
    if (run.queries.contains(list.query_id)) throw Error("duplicate query '" + list.query_id + "' in run");
    add_ranking(run, list.query_id, list.entries);
  }
  return run;
}

void check_run(const RunFile& run) {
  for (const auto& [q, entries] : run.queries) {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (entries[i].rank != i + 1) throw Error("query '" + q + "': ranks are not consecutive from 1");
      if (i > 0 && entries[i].score > entries[i - 1].score) {
        throw Error("query '" + q + "': score increases at rank " + std::to_string(i + 1));
      }
      if (!seen.insert(entries[i].doc_id).second) {
        throw Error("query '" + q + "': document '" + entries[i].doc_id + "' repeated");
      }
    }
  }
}

std::string format_run(const RunFile& run) {
  std::string out;
  for (const auto& [q, entries] : run.queries) {
    for (const auto& e : entries) {
      out += fmt::format("{} Q0 {} {} {:.6f} {}\n", q, e.doc_id, e.rank, e.score, run.tag);
    }
  }
  return out;
}

void write_run(const std::filesystem::path& path, const RunFile& run) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_run(run);
}

RunFile load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const std::string source = path.string();
  RunFile run;
  bool tagged = false;
  std::map<std::string, std::set<std::string>> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    std::istringstream fields_in(line);
    std::vector<std::string> f;
    for (std::string s; fields_in >> s;) f.push_back(std::move(s));
    if (f.empty()) continue;
    if (f.size() != 6) throw ParseError(source, lineno, "expected 6 columns, got " + std::to_string(f.size()));
    std::size_t rank = 0;
    double score = 0.0;
    auto r = std::from_chars(f[3].data(), f[3].data() + f[3].size(), rank);
    if (r.ec != std::errc() || r.ptr != f[3].data() + f[3].size()) {
      throw ParseError(source, lineno, "rank '" + f[3] + "' is not an integer");
    }
    auto s = std::from_chars(f[4].data(), f[4].data() + f[4].size(), score);
    if (s.ec != std::errc() || s.ptr != f[4].data() + f[4].size()) {
      throw ParseError(source, lineno, "score '" + f[4] + "' is not a number");
    }
    if (!seen[f[0]].insert(f[2]).second) {
      throw ParseError(source, lineno, "document '" + f[2] + "' repeated for query '" + f[0] + "'");
    }
    if (!tagged) {
      run.tag = f[5];
      tagged = true;
    }
    run.queries[f[0]].push_back({f[2], score, rank});
  }
  // Score descending; the rank column settles ties.
  for (auto& [q, entries] : run.queries) {
    std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.rank < b.rank;
    });
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i].rank = i + 1;
  }
  return run;
}

}  // namespace adaptrank
