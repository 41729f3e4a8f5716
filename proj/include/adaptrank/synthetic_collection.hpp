#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "adaptrank/corpus.hpp"

namespace adaptrank {

/// Shape of a generated benchmark. The vocabulary is split into a shared
/// background pool and `n_topics` disjoint topic pools.
struct SyntheticSpec {
  std::size_t n_topics = 4;
  std::size_t docs_per_topic = 50;
  std::size_t n_queries = 40;
  std::size_t vocab_size = 2000;
  std::size_t doc_len = 60;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;

  double background_fraction = 0.2;  // share of the vocabulary in the background pool
  double topic_purity = 0.6;         // share of a document's tokens from its topic pool
  double core_purity = 0.8;          // same, for grade-2 documents
  double core_rate = 0.3;            // chance that a same-topic document is grade 2
  double leak_rate = 0.05;           // share of tokens drawn from one other topic
  std::size_t query_len = 3;
  std::size_t query_depth = 5;       // queries draw from this many top-ranked topic terms; 0 = whole pool
  double zipf_exponent = 1.0;
  double digest_rate = 0.1;          // chance that a grade-1 document is a long multi-topic digest
  double digest_length = 3.0;        // digest length multiplier
  double digest_leak = 0.3;          // share of digest tokens drawn from one other topic
};

struct SyntheticCollection {
  Corpus corpus;
  std::vector<Query> queries;
  Qrels qrels;
  std::vector<std::size_t> doc_topic;    // parallel to corpus
  std::vector<std::size_t> query_topic;  // parallel to queries
  std::size_t background_size = 0;
  std::size_t topic_pool_size = 0;
  double noise_rate = 0.0;
};

/// Throws Error when the vocabulary cannot hold the disjoint pools or a
/// count is zero.
SyntheticCollection generate_synthetic_collection(const SyntheticSpec& spec);

/// Pool a generated term belongs to: topic index, or n_topics for background.
std::size_t term_pool(std::string_view term, std::size_t n_topics);

/// corpus.jsonl, queries.tsv, qrels.txt in `dir`.
void write_collection(const std::filesystem::path& dir, const SyntheticCollection& collection);

}  // namespace adaptrank
