#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/retrieval.hpp"

namespace adaptrank {

struct GeneratorConfig {
  std::size_t query_len = 4;        // K
  double contrast_penalty = 1.0;    // lambda
  std::size_t retrieval_depth = 100;  // R
  std::size_t pairs_per_seed = 1;   // P
  std::uint64_t seed = 0;

  /// Throws Error unless K >= 1, R >= 2, P >= 1 and lambda >= 0.
  void validate() const;
};

struct GeneratedQuery {
  Tokens tokens;                    // in order of first occurrence in the source document
  std::vector<double> term_scores;  // parallel to tokens
};

struct SyntheticTriple {
  Query query;
  std::string pos_doc_id;
  std::string neg_doc_id;
  std::string seed_doc_id;
  Tokens seed_query;
  std::vector<double> contrast_scores;
};

struct DocPair {
  std::string pos;
  std::string neg;

  friend bool operator==(const DocPair&, const DocPair&) = default;
};

/// Source of generated queries. The extractive generator below is the stock
/// implementation; a learned generator can be plugged in through this.
class QueryGenerator {
 public:
  virtual ~QueryGenerator() = default;
  virtual GeneratedQuery seed_query(const Document& doc) const = 0;
  virtual GeneratedQuery contrastive_query(const Document& pos, const Document& neg) const = 0;
};

/// The K terms of `doc` with the highest tf*idf, ties by first occurrence.
/// Throws Error on a document without tokens.
GeneratedQuery generate_seed_query(const Document& doc, const InvertedIndex& index,
                                   std::size_t k);

/// Top-K terms of `pos` under c(t) = tf(t,pos)*idf(t) - lambda*tf(t,neg)*idf(t).
/// Falls back to the seed query when no term scores above zero or the two
/// documents have identical tokens.
GeneratedQuery generate_contrastive_query(const Document& pos, const Document& neg,
                                          const InvertedIndex& index, std::size_t k,
                                          double lambda);

class ExtractiveGenerator final : public QueryGenerator {
 public:
  ExtractiveGenerator(const InvertedIndex& index, std::size_t k, double lambda)
      : index_(index), k_(k), lambda_(lambda) {}

  GeneratedQuery seed_query(const Document& doc) const override {
    return generate_seed_query(doc, index_, k_);
  }
  GeneratedQuery contrastive_query(const Document& pos, const Document& neg) const override {
    return generate_contrastive_query(pos, neg, index_, k_, lambda_);
  }

 private:
  const InvertedIndex& index_;
  std::size_t k_;
  double lambda_;
};

/// Retrieves the top `depth` documents for the seed query, drops
/// `exclude_doc`, and samples up to `n_pairs` distinct unordered pairs. The
/// document covering more seed-query terms becomes pos (ties: lower doc id).
std::vector<DocPair> sample_confusable_pairs(const InvertedIndex& index, const Tokens& seed_query,
                                             std::size_t depth, std::size_t n_pairs,
                                             std::string_view exclude_doc, std::uint64_t seed);

/// The candidate set sample_confusable_pairs draws from, in doc-id order.
std::vector<std::string> confusable_candidates(const InvertedIndex& index,
                                               const Tokens& seed_query, std::size_t depth,
                                               std::string_view exclude_doc);

std::vector<SyntheticTriple> synthesize(const Corpus& corpus, const InvertedIndex& index,
                                        const GeneratorConfig& config);
std::vector<SyntheticTriple> synthesize(const Corpus& corpus, const InvertedIndex& index,
                                        const GeneratorConfig& config,
                                        const QueryGenerator& generator);

/// JSONL: {"query": str, "pos": id, "neg": id, "seed_doc": id}.
void write_triples(const std::filesystem::path& path, const std::vector<SyntheticTriple>& triples);
/// Query ids are assigned as "syn<line index>"; provenance is not stored.
std::vector<SyntheticTriple> load_triples(const std::filesystem::path& path);

}  // namespace adaptrank
