#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/retrieval.hpp"

namespace adaptrank {

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
};

/// Ranked lists per query: ranks consecutive from 1, scores non-increasing,
/// no doc repeated within a query.
struct RunFile {
  std::string tag = "run";
  std::map<std::string, std::vector<RunEntry>, std::less<>> queries;

  std::vector<std::string> query_ids() const;
  /// Doc ids of each query, best first, truncated to `depth`.
  CandidateLists candidates(std::size_t depth = static_cast<std::size_t>(-1)) const;
  /// Copy holding only the listed queries.
  RunFile restricted_to(const std::vector<std::string>& query_ids) const;
};

/// Appends a ranked list, assigning ranks from its order. Throws Error if the
/// list breaks the ordering invariants.
void add_ranking(RunFile& run, const std::string& query_id, const std::vector<ScoredDoc>& docs);

RunFile run_from_lists(const std::vector<ScoredList>& lists, std::string tag);

/// Throws Error when ranks are not consecutive from 1, scores increase, or a
/// doc repeats.
void check_run(const RunFile& run);

/// TREC six-column format `qid Q0 docid rank score tag`, score with 6 decimals.
void write_run(const std::filesystem::path& path, const RunFile& run);
std::string format_run(const RunFile& run);
/// Entries are ordered by their rank column, then renumbered from 1. The tag
/// is taken from the first line.
RunFile load_run(const std::filesystem::path& path);

}  // namespace adaptrank
