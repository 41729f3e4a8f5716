#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adaptrank/corpus.hpp"
#include "adaptrank/text.hpp"

namespace adaptrank {

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

using DocNo = std::uint32_t;
using TermId = std::uint32_t;

struct Posting {
  DocNo doc;
  std::uint32_t tf;
};

struct TermCount {
  TermId term;
  std::uint32_t tf;
};

struct ScoredDoc {
  std::string doc_id;
  double score;
};

/// Search output: score descending, ties by ascending doc id.
struct ScoredList {
  std::string query_id;
  std::vector<ScoredDoc> entries;
};

/// Frozen in-memory inverted index with a forward (per-document) view.
/// Documents are numbered in corpus order.
class InvertedIndex {
 public:
  /// Throws Error on an empty corpus or a document with no tokens.
  static InvertedIndex build(const Corpus& corpus, Bm25Params params = {});

  std::size_t n_docs() const noexcept { return doc_ids_.size(); }
  std::size_t n_terms() const noexcept { return terms_.size(); }
  double avg_doc_len() const noexcept { return avg_doc_len_; }
  const Bm25Params& bm25_params() const noexcept { return params_; }

  std::optional<DocNo> doc_number(std::string_view doc_id) const;
  /// Throws Error for an unknown id.
  DocNo require_doc(std::string_view doc_id) const;
  const std::string& doc_id(DocNo doc) const { return doc_ids_[doc]; }
  std::uint32_t doc_len(DocNo doc) const { return doc_len_[doc]; }

  std::optional<TermId> term_id(std::string_view term) const;
  const std::string& term(TermId id) const { return terms_[id]; }
  std::size_t doc_freq(std::string_view term) const;
  std::span<const Posting> postings(TermId id) const { return postings_[id]; }
  std::span<const Posting> postings(std::string_view term) const;

  /// Term counts of one document, sorted by term id.
  std::span<const TermCount> doc_terms(DocNo doc) const { return forward_[doc]; }
  std::uint32_t tf(DocNo doc, TermId term) const;
  std::uint32_t tf(DocNo doc, std::string_view term) const;

  /// ln(1 + (N - df + 0.5) / (df + 0.5)); unseen terms use df = 0.
  double idf(std::string_view term) const;
  double idf(TermId id) const { return idf_[id]; }
  /// Euclidean norm of the document's tf*idf vector.
  double doc_tfidf_norm(DocNo doc) const { return doc_norm_[doc]; }

  /// BM25 contribution of a single term with frequency `tf` in `doc`.
  double term_score(double idf, std::uint32_t tf, DocNo doc) const;

 private:
  InvertedIndex() = default;

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, DocNo> doc_lookup_;
  std::vector<std::uint32_t> doc_len_;
  double avg_doc_len_ = 0.0;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_lookup_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::vector<TermCount>> forward_;
  std::vector<double> idf_;
  std::vector<double> doc_norm_;
};

/// Distinct tokens in order of first occurrence.
Tokens distinct_terms(const Tokens& tokens);

/// Sum over distinct query terms of idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avglen)).
double bm25_score(const InvertedIndex& index, const Tokens& query_tokens, std::string_view doc_id);
double bm25_score(const InvertedIndex& index, const Tokens& query_tokens, DocNo doc);

/// Top-k documents with positive score.
ScoredList search(const InvertedIndex& index, const Tokens& query_tokens,
                  std::size_t k = std::numeric_limits<std::size_t>::max(),
                  std::string query_id = {});

}  // namespace adaptrank
