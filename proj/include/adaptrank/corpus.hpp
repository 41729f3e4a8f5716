#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adaptrank/text.hpp"

namespace adaptrank {

struct Document {
  std::string id;
  std::optional<std::string> title;
  std::string text;
  Tokens tokens;  // tokenize(title + " " + text)
};

struct Query {
  std::string id;
  std::string text;
  Tokens tokens;
};

/// Queries keyed by id.
using QueryMap = std::map<std::string, Query, std::less<>>;

Document make_document(std::string id, std::optional<std::string> title, std::string text);
Query make_query(std::string id, std::string text);

/// Throws Error on a duplicate id.
QueryMap index_queries(const std::vector<Query>& queries);

/// Ordered document collection with unique ids.
class Corpus {
 public:
  Corpus() = default;

  /// Throws Error on an empty or duplicate id.
  void add(Document doc);

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const Document* find(std::string_view id) const;
  const Document& at(std::string_view id) const;

  auto begin() const { return docs_.begin(); }
  auto end() const { return docs_.end(); }
  const std::vector<Document>& documents() const noexcept { return docs_; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Graded judgments. Absent pairs read as grade 0; negative grades are
/// stored as 0.
class Qrels {
 public:
  void set(const std::string& query_id, const std::string& doc_id, int grade);

  int grade(std::string_view query_id, std::string_view doc_id) const;
  int g_max() const noexcept { return g_max_; }
  std::size_t size() const noexcept;

  /// Judgments for one query, ordered by doc id; nullptr if none.
  const std::map<std::string, int, std::less<>>* judged(std::string_view query_id) const;
  std::vector<std::string> query_ids() const;

  /// Copy holding only the listed queries.
  Qrels restricted_to(const std::vector<std::string>& query_ids) const;

 private:
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>> judgments_;
  int g_max_ = 0;
};

struct TrainingTriple {
  std::string query_id;
  std::string pos_doc_id;
  std::string neg_doc_id;

  friend bool operator==(const TrainingTriple&, const TrainingTriple&) = default;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::map<std::string, std::size_t> fold_of;

  /// Query ids of one fold, in id order.
  std::vector<std::string> members(std::size_t fold) const;
  /// Query ids of every other fold, in id order.
  std::vector<std::string> complement(std::size_t fold) const;
};

/// Candidate list per query, best first; the shape build_triples consumes.
using CandidateLists = std::map<std::string, std::vector<std::string>>;

Corpus load_corpus(const std::filesystem::path& path);
Qrels load_qrels(const std::filesystem::path& path);
std::vector<Query> load_queries(const std::filesystem::path& path);

void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);
void write_queries(const std::filesystem::path& path, const std::vector<Query>& queries);

FoldAssignment make_folds(const std::vector<std::string>& query_ids, std::size_t k,
                          std::uint64_t seed);

/// For every judged positive of every query in `candidates`, pairs it with up
/// to `per_pos` distinct grade-0 candidates drawn uniformly without
/// replacement.
std::vector<TrainingTriple> build_triples(const Qrels& qrels, const CandidateLists& candidates,
                                          std::size_t per_pos, std::uint64_t seed);

/// Chooses round(rate * n) of n triple slots uniformly for a pos/neg swap.
std::vector<bool> plan_noise(std::size_t n, double rate, std::uint64_t seed);

/// Swaps pos/neg on the planned slots of any triple list and returns the
/// flags, one per triple.
template <class Triple>
std::vector<bool> inject_noise(std::vector<Triple>& triples, double rate, std::uint64_t seed) {
  std::vector<bool> flags = plan_noise(triples.size(), rate, seed);
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (flags[i]) std::swap(triples[i].pos_doc_id, triples[i].neg_doc_id);
  }
  return flags;
}

void write_noise_flags(const std::filesystem::path& path, const std::vector<bool>& flags);
std::vector<bool> load_noise_flags(const std::filesystem::path& path);

}  // namespace adaptrank
