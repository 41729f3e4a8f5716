#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/ranker.hpp"
#include "adaptrank/retrieval.hpp"
#include "adaptrank/run_file.hpp"

namespace adaptrank {

/// Rescores the top `depth` docs of every query with the ranker and sorts
/// them by score (ties by doc id). Docs past the window keep their order
/// below it with scores -2, -3, ...; ranker scores lie in (-1, 1) so the
/// run stays monotone. Throws Error for a doc missing from the index or a
/// query missing from `queries`.
RunFile rerank(const RankerParams& params, const InvertedIndex& index, const QueryMap& queries,
               const RunFile& first_stage, std::size_t depth, std::string tag = "rerank");

/// BM25 first stage for every query.
RunFile bm25_run(const InvertedIndex& index, const std::vector<Query>& queries,
                 std::size_t depth, std::string tag = "bm25");

/// Reciprocal rank fusion: score(d) = sum over runs holding d of
/// 1 / (k + rank). Sorted by score, ties by doc id.
RunFile rrf(const std::vector<RunFile>& runs, double k = 1.0, std::string tag = "rrf");

}  // namespace adaptrank
