#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "adaptrank/error.hpp"
#include "adaptrank/retrieval.hpp"
#include "adaptrank/rng.hpp"
#include "support.hpp"

using namespace adaptrank;
using testing_support::BruteBm25;
using testing_support::make_corpus;

TEST(Index, CountsPostingsAndLengths) {
  const auto c = make_corpus({{"d", "a a b"}});
  const auto index = InvertedIndex::build(c);
  ASSERT_EQ(index.postings("a").size(), 1u);
  EXPECT_EQ(index.postings("a")[0].tf, 2u);
  EXPECT_EQ(index.postings("b")[0].tf, 1u);
  EXPECT_EQ(index.doc_len(0), 3u);
  EXPECT_DOUBLE_EQ(index.avg_doc_len(), 3.0);
  EXPECT_TRUE(index.postings("zzz").empty());
  EXPECT_EQ(index.tf(0, "a"), 2u);
  ASSERT_EQ(index.doc_terms(0).size(), 2u);
}

TEST(Index, DocumentFrequency) {
  const auto index = InvertedIndex::build(make_corpus({{"d1", "t x"}, {"d2", "t y"}}));
  EXPECT_EQ(index.doc_freq("t"), 2u);
  EXPECT_EQ(index.doc_freq("x"), 1u);
  EXPECT_EQ(index.doc_freq("nope"), 0u);
  EXPECT_EQ(index.require_doc("d2"), 1u);
  EXPECT_THROW(index.require_doc("d3"), Error);
}

TEST(Index, RejectsEmptyCorpus) {
  EXPECT_THROW(InvertedIndex::build(Corpus{}), Error);
  EXPECT_THROW(InvertedIndex::build(make_corpus({{"d1", "ok"}, {"d2", "!!!"}})), Error);
}

TEST(Bm25, NoOverlapScoresZero) {
  const auto index = InvertedIndex::build(make_corpus({{"d1", "a b"}, {"d2", "c d"}}));
  EXPECT_EQ(bm25_score(index, {"c"}, "d1"), 0.0);
}

TEST(Bm25, WorkedExample) {
  // N = 2, df = 1, tf = 2, len = avglen.
  const auto index = InvertedIndex::build(make_corpus({{"d1", "t t"}, {"d2", "u u"}}));
  const double expected = std::log(2.0) * (2.0 * 1.9) / (2.0 + 0.9);
  EXPECT_NEAR(bm25_score(index, {"t"}, "d1"), expected, 1e-12);
  EXPECT_NEAR(bm25_score(index, {"t"}, "d1"), 0.9083, 5e-5);
  EXPECT_DOUBLE_EQ(index.idf("t"), std::log(2.0));
}

TEST(Bm25, RepeatedQueryTermsCountOnce) {
  const auto index = InvertedIndex::build(make_corpus({{"d1", "t t"}, {"d2", "u u"}}));
  EXPECT_EQ(bm25_score(index, {"t", "t"}, "d1"), bm25_score(index, {"t"}, "d1"));
}

TEST(Bm25, DocEqualToQueryIsPositive) {
  const auto c = make_corpus({{"d1", "alpha beta gamma"}, {"d2", "alpha delta"}, {"d3", "eps"}});
  const auto index = InvertedIndex::build(c);
  for (const auto& d : c) EXPECT_GT(bm25_score(index, d.tokens, d.id), 0.0) << d.id;
}

TEST(Search, TruncatesAndBreaksTiesById) {
  const auto index =
      InvertedIndex::build(make_corpus({{"b", "x y"}, {"a", "x y"}, {"c", "z z"}, {"d", "y q"}}));
  const auto all = search(index, {"x"}, 10, "q");
  EXPECT_EQ(all.query_id, "q");
  ASSERT_EQ(all.entries.size(), 2u);
  EXPECT_EQ(all.entries[0].doc_id, "a");
  EXPECT_EQ(all.entries[1].doc_id, "b");
  EXPECT_EQ(all.entries[0].score, all.entries[1].score);
  EXPECT_EQ(search(index, {"x", "y"}, 1).entries.size(), 1u);
  EXPECT_TRUE(search(index, {"nothing"}).entries.empty());
}

namespace {

std::vector<std::string> brute_order(const BruteBm25& brute, const Tokens& query) {
  std::vector<std::pair<double, std::string>> scored;
  for (std::size_t d = 0; d < brute.docs.size(); ++d) {
    const double s = brute.score(query, d);
    if (s > 0.0) scored.emplace_back(s, brute.ids[d]);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (std::abs(x.first - y.first) > 1e-9) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::string> out;
  for (const auto& [_, id] : scored) out.push_back(id);
  return out;
}

Corpus random_corpus(Rng& rng, std::size_t n_docs, std::size_t vocab) {
  Corpus c;
  std::vector<std::size_t> order(n_docs);
  for (std::size_t i = 0; i < n_docs; ++i) order[i] = i;
  rng.shuffle(std::span(order));
  for (std::size_t i : order) {
    std::string text;
    const std::size_t len = 1 + rng.uniform_index(12);
    for (std::size_t j = 0; j < len; ++j) text += "w" + std::to_string(rng.uniform_index(vocab)) + " ";
    c.add(make_document("doc" + std::to_string(i), std::nullopt, text));
  }
  return c;
}

}  // namespace

TEST(Search, FiveDocOneTermMatchesBruteForce) {
  const auto c = make_corpus(
      {{"d1", "k k x"}, {"d2", "k"}, {"d3", "y y y"}, {"d4", "k x x x x x"}, {"d5", "x k k k"}});
  const auto index = InvertedIndex::build(c);
  const BruteBm25 brute(c);
  std::vector<std::string> got;
  for (const auto& e : search(index, {"k"}).entries) got.push_back(e.doc_id);
  EXPECT_EQ(got, brute_order(brute, {"k"}));
}

TEST(Search, MatchesBruteForceOnRandomCorpora) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_corpus(rng, 1 + rng.uniform_index(100), 3 + rng.uniform_index(30));
    const auto index = InvertedIndex::build(c);
    const BruteBm25 brute(c);
    for (int qn = 0; qn < 3; ++qn) {
      Tokens q;
      for (std::size_t j = 0, n = 1 + rng.uniform_index(4); j < n; ++j) {
        q.push_back("w" + std::to_string(rng.uniform_index(40)));
      }
      const auto list = search(index, q);
      std::vector<std::string> got;
      for (const auto& e : list.entries) {
        got.push_back(e.doc_id);
        EXPECT_NEAR(e.score, brute.score(q, index.require_doc(e.doc_id)), 1e-9);
      }
      ASSERT_EQ(got, brute_order(brute, q)) << "trial " << trial;
    }
  }
}

TEST(Text, DistinctTermsKeepFirstOccurrence) {
  EXPECT_EQ(distinct_terms({"b", "a", "b", "c", "a"}), (Tokens{"b", "a", "c"}));
}
