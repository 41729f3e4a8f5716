#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/metatrain.hpp"
#include "adaptrank/metrics.hpp"
#include "adaptrank/ranker.hpp"
#include "adaptrank/retrieval.hpp"
#include "adaptrank/run_file.hpp"
#include "adaptrank/synthesis.hpp"

namespace adaptrank {

struct CvConfig {
  std::size_t folds = 5;
  std::size_t depth = 100;        // rerank window
  std::size_t per_pos = 2;        // target negatives per judged positive
  TrainConfig train;
  TrainMode mode = TrainMode::Meta;
  Arch arch = Arch::Linear;
  std::size_t hidden = RankerParams::kDefaultHidden;
  double init_scale = 0.1;  // uniform init half-width; 0 starts from zeros
  std::vector<MetricSpec> metrics{{Metric::Ndcg, 20}, {Metric::Err, 20}, {Metric::Precision, 20}};
  std::uint64_t seed = 0;
};

struct FoldOutcome {
  std::size_t fold = 0;
  std::vector<std::string> test_queries;
  std::size_t target_triples = 0;
  RankerParams init;
  TrainResult training;
  MetricReport report;
};

struct CvReport {
  MetricReport pooled;
  std::vector<FoldOutcome> folds;
  RunFile run;  // reranked test-fold lists of every fold
};

/// Feature pairs for synthetic triples.
std::vector<PairExample> prepare_examples(const std::vector<SyntheticTriple>& triples,
                                          const InvertedIndex& index);
/// Feature pairs for judged triples; queries are looked up by id.
std::vector<PairExample> prepare_examples(const std::vector<TrainingTriple>& triples,
                                          const QueryMap& queries, const InvertedIndex& index);

/// Per fold: target triples come from the training folds' judgments over the
/// first-stage candidates, the ranker is trained from a seeded init, and the
/// test fold is reranked. Metrics are pooled over every query.
CvReport cross_validate(const InvertedIndex& index, const QueryMap& queries, const Qrels& qrels,
                        const RunFile& first_stage, std::span<const PairExample> synth,
                        const CvConfig& config);
CvReport cross_validate(const InvertedIndex& index, const QueryMap& queries, const Qrels& qrels,
                        const RunFile& first_stage, const std::vector<SyntheticTriple>& synth,
                        const CvConfig& config);

}  // namespace adaptrank
