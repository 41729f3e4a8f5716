#include "adaptrank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "adaptrank/error.hpp"

namespace adaptrank {

InvertedIndex InvertedIndex::build(const Corpus& corpus, Bm25Params params) {
  if (corpus.empty()) throw Error("cannot index an empty corpus");
  InvertedIndex index;
  index.params_ = params;
  const std::size_t n = corpus.size();
  index.doc_ids_.reserve(n);
  index.doc_len_.reserve(n);
  index.forward_.resize(n);

  std::uint64_t total_len = 0;
  std::unordered_map<TermId, std::uint32_t> counts;
  for (std::size_t d = 0; d < n; ++d) {
    const Document& doc = corpus[d];
    if (doc.tokens.empty()) throw Error("document '" + doc.id + "' has no tokens");
    index.doc_ids_.push_back(doc.id);
    index.doc_lookup_.emplace(doc.id, static_cast<DocNo>(d));
    index.doc_len_.push_back(static_cast<std::uint32_t>(doc.tokens.size()));
    total_len += doc.tokens.size();

    counts.clear();
    for (const auto& tok : doc.tokens) {
      auto [it, inserted] = index.term_lookup_.try_emplace(tok, static_cast<TermId>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(tok);
        index.postings_.emplace_back();
      }
      ++counts[it->second];
    }
    auto& fwd = index.forward_[d];
    fwd.reserve(counts.size());
    for (const auto& [term, tf] : counts) fwd.push_back({term, tf});
    std::sort(fwd.begin(), fwd.end(), [](const TermCount& a, const TermCount& b) { return a.term < b.term; });
    for (const auto& tc : fwd) index.postings_[tc.term].push_back({static_cast<DocNo>(d), tc.tf});
  }
  index.avg_doc_len_ = static_cast<double>(total_len) / static_cast<double>(n);

  index.idf_.resize(index.terms_.size());
  const double big_n = static_cast<double>(n);
  for (std::size_t t = 0; t < index.terms_.size(); ++t) {
    const double df = static_cast<double>(index.postings_[t].size());
    index.idf_[t] = std::log(1.0 + (big_n - df + 0.5) / (df + 0.5));
  }
  index.doc_norm_.resize(n);
  for (std::size_t d = 0; d < n; ++d) {
    double sq = 0.0;
    for (const auto& tc : index.forward_[d]) {
      const double w = tc.tf * index.idf_[tc.term];
      sq += w * w;
    }
    index.doc_norm_[d] = std::sqrt(sq);
  }
  return index;
}

std::optional<DocNo> InvertedIndex::doc_number(std::string_view doc_id) const {
  auto it = doc_lookup_.find(std::string(doc_id));
  if (it == doc_lookup_.end()) return std::nullopt;
  return it->second;
}

DocNo InvertedIndex::require_doc(std::string_view doc_id) const {
  if (auto d = doc_number(doc_id)) return *d;
  throw Error("document '" + std::string(doc_id) + "' is not in the index");
}

std::optional<TermId> InvertedIndex::term_id(std::string_view term) const {
  auto it = term_lookup_.find(std::string(term));
  if (it == term_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t InvertedIndex::doc_freq(std::string_view term) const {
  auto id = term_id(term);
  return id ? postings_[*id].size() : 0;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
  auto id = term_id(term);
  if (!id) return {};
  return postings_[*id];
}

std::uint32_t InvertedIndex::tf(DocNo doc, TermId term) const {
  const auto& fwd = forward_[doc];
  auto it = std::lower_bound(fwd.begin(), fwd.end(), term,
                             [](const TermCount& tc, TermId t) { return tc.term < t; });
  return it != fwd.end() && it->term == term ? it->tf : 0;
}

std::uint32_t InvertedIndex::tf(DocNo doc, std::string_view term) const {
  auto id = term_id(term);
  return id ? tf(doc, *id) : 0;
}

double InvertedIndex::idf(std::string_view term) const {
  if (auto id = term_id(term)) return idf_[*id];
  const double n = static_cast<double>(n_docs());
  return std::log(1.0 + (n + 0.5) / 0.5);
}

double InvertedIndex::term_score(double idf, std::uint32_t tf, DocNo doc) const {
  const double f = static_cast<double>(tf);
  const double norm = 1.0 - params_.b + params_.b * doc_len_[doc] / avg_doc_len_;
  return idf * f * (params_.k1 + 1.0) / (f + params_.k1 * norm);
}

Tokens distinct_terms(const Tokens& tokens) {
  Tokens out;
  std::unordered_set<std::string_view> seen;
  for (const auto& t : tokens) {
    if (seen.insert(t).second) out.push_back(t);
  }
  return out;
}

double bm25_score(const InvertedIndex& index, const Tokens& query_tokens, DocNo doc) {
  double score = 0.0;
  for (const auto& term : distinct_terms(query_tokens)) {
    const auto id = index.term_id(term);
    if (!id) continue;
    const std::uint32_t tf = index.tf(doc, *id);
    if (tf == 0) continue;
    score += index.term_score(index.idf(*id), tf, doc);
  }
  return score;
}

double bm25_score(const InvertedIndex& index, const Tokens& query_tokens, std::string_view doc_id) {
  return bm25_score(index, query_tokens, index.require_doc(doc_id));
}

ScoredList search(const InvertedIndex& index, const Tokens& query_tokens, std::size_t k,
                  std::string query_id) {
  ScoredList out{std::move(query_id), {}};
  if (k == 0) return out;
  // Terms are accumulated in the same order bm25_score sums them, so both
  // paths produce bit-identical scores.
  std::vector<double> acc(index.n_docs(), 0.0);
  for (const auto& term : distinct_terms(query_tokens)) {
    const auto id = index.term_id(term);
    if (!id) continue;
    const double idf = index.idf(*id);
    for (const Posting& p : index.postings(*id)) acc[p.doc] += index.term_score(idf, p.tf, p.doc);
  }
  std::vector<DocNo> hits;
  for (DocNo d = 0; d < acc.size(); ++d) {
    if (acc[d] > 0.0) hits.push_back(d);
  }
  auto better = [&](DocNo a, DocNo b) {
    if (acc[a] != acc[b]) return acc[a] > acc[b];
    return index.doc_id(a) < index.doc_id(b);
  };
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
  out.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.entries.push_back({index.doc_id(hits[i]), acc[hits[i]]});
  return out;
}

}  // namespace adaptrank
