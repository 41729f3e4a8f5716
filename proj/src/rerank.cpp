#include "adaptrank/rerank.hpp"

#include <algorithm>
#include <map>

#include "adaptrank/error.hpp"

namespace adaptrank {

RunFile rerank(const RankerParams& params, const InvertedIndex& index, const QueryMap& queries,
               const RunFile& first_stage, std::size_t depth, std::string tag) {
  if (depth < 1) throw Error("rerank depth must be at least 1");
  RunFile out;
  out.tag = std::move(tag);
  for (const auto& [qid, entries] : first_stage.queries) {
    auto q = queries.find(qid);
    if (q == queries.end()) throw Error("query '" + qid + "' has no text");
    const std::size_t window = std::min(depth, entries.size());
    std::vector<ScoredDoc> ranked;
    ranked.reserve(entries.size());
    for (std::size_t i = 0; i < window; ++i) {
      const auto doc = index.doc_number(entries[i].doc_id);
      if (!doc) throw Error("document '" + entries[i].doc_id + "' is not in the index");
      ranked.push_back({entries[i].doc_id, score(params, extract_features(q->second.tokens, *doc, index))});
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc_id < b.doc_id;
    });
    for (std::size_t i = window; i < entries.size(); ++i) {
      ranked.push_back({entries[i].doc_id, -2.0 - static_cast<double>(i - window)});
    }
    add_ranking(out, qid, ranked);
  }
  return out;
}

RunFile bm25_run(const InvertedIndex& index, const std::vector<Query>& queries, std::size_t depth,
                 std::string tag) {
  RunFile run;
  run.tag = std::move(tag);
  for (const auto& q : queries) {
    ScoredList list = search(index, q.tokens, depth, q.id);
    if (!list.entries.empty()) add_ranking(run, q.id, list.entries);
  }
  return run;
}

RunFile rrf(const std::vector<RunFile>& runs, double k, std::string tag) {
  if (runs.size() < 2) throw Error("fusion needs at least two runs");
  std::map<std::string, std::map<std::string, double>> fused;
  for (const auto& run : runs) {
    for (const auto& [q, entries] : run.queries) {
      auto& scores = fused[q];
      for (const auto& e : entries) scores[e.doc_id] += 1.0 / (k + static_cast<double>(e.rank));
    }
  }
  RunFile out;
  out.tag = std::move(tag);
  for (const auto& [q, scores] : fused) {
    std::vector<ScoredDoc> docs;
    for (const auto& [d, s] : scores) docs.push_back({d, s});
    std::stable_sort(docs.begin(), docs.end(),
                     [](const ScoredDoc& a, const ScoredDoc& b) { return a.score > b.score; });
    add_ranking(out, q, docs);
  }
  return out;
}

}  // namespace adaptrank
