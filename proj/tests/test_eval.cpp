#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "adaptrank/cross_validate.hpp"
#include "adaptrank/error.hpp"
#include "adaptrank/metrics.hpp"
#include "adaptrank/noise_bench.hpp"
#include "adaptrank/rerank.hpp"
#include "adaptrank/rng.hpp"
#include "adaptrank/run_file.hpp"
#include "adaptrank/synthetic_collection.hpp"
#include "metric_oracles.hpp"
#include "support.hpp"

using namespace adaptrank;
using namespace testing_support;

namespace {

RunFile single_query_run(const std::vector<std::string>& docs, const std::string& qid = "q1") {
  RunFile run;
  std::vector<ScoredDoc> list;
  for (std::size_t i = 0; i < docs.size(); ++i) list.push_back({docs[i], -static_cast<double>(i)});
  add_ranking(run, qid, list);
  return run;
}

}  // namespace

TEST(Ndcg, WorkedValues) {
  const std::vector<int> grades{0, 1};
  const std::vector<int> judged{1};
  EXPECT_NEAR(ndcg(grades, judged, 2), 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(ndcg(grades, judged, 2), 0.63093, 5e-6);
  const std::vector<int> none{0, 0};
  EXPECT_EQ(ndcg(none, none, 20), 0.0);
}

TEST(Ndcg, IdealRunScoresOne) {
  Qrels q;
  q.set("q1", "a", 2);
  q.set("q1", "b", 1);
  q.set("q1", "c", 1);
  q.set("q1", "d", 0);
  const auto v = ndcg_at_k(single_query_run({"a", "c", "b", "d"}), q, 20);
  EXPECT_DOUBLE_EQ(v.at("q1"), 1.0);
}

TEST(Err, WorkedValues) {
  const std::vector<int> one{2};
  EXPECT_DOUBLE_EQ(err(one, 20, 2), 0.75);
  const std::vector<int> two{2, 2};
  EXPECT_DOUBLE_EQ(err(two, 20, 2), 0.84375);
  const std::vector<int> zeros{0, 0, 0};
  EXPECT_EQ(err(zeros, 20, 2), 0.0);
}

TEST(Precision, PaddingAndExtremes) {
  std::vector<int> all(20, 1);
  EXPECT_EQ(precision(all, 20), 1.0);
  std::vector<int> ten{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  EXPECT_EQ(precision(ten, 20), 0.25);
  std::vector<int> none(5, 0);
  EXPECT_EQ(precision(none, 20), 0.0);
}

TEST(Metrics, MatchBruteForceOracles) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(10);
    std::vector<int> ranked(n);
    for (int& g : ranked) g = static_cast<int>(rng.uniform_index(5));
    std::vector<int> judged = ranked;
    for (std::size_t extra = rng.uniform_index(4); extra > 0; --extra) {
      judged.push_back(static_cast<int>(rng.uniform_index(5)));
    }
    const int g_max = std::max(1, *std::max_element(judged.begin(), judged.end()));
    for (std::size_t k : {std::size_t{20}, std::size_t{1} + rng.uniform_index(10)}) {
      EXPECT_NEAR(ndcg(ranked, judged, k), oracle_ndcg(ranked, judged, k), 1e-12);
      EXPECT_NEAR(err(ranked, k, g_max), oracle_err(ranked, k, g_max), 1e-12);
      EXPECT_NEAR(precision(ranked, k), oracle_precision(ranked, k), 1e-12);
    }
  }
}

TEST(Metrics, StayInUnitInterval) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> ranked(1 + rng.uniform_index(30));
    for (int& g : ranked) g = static_cast<int>(rng.uniform_index(4));
    for (double v : {ndcg(ranked, ranked, 20), err(ranked, 20, 3), precision(ranked, 20)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(MetricSpec, ParseAndName) {
  EXPECT_EQ(MetricSpec::parse("NDCG@10").name(), "ndcg@10");
  EXPECT_EQ(MetricSpec::parse("p@5").metric, Metric::Precision);
  EXPECT_EQ(MetricSpec::parse("err@20").k, 20u);
  EXPECT_THROW(MetricSpec::parse("ndcg"), Error);
  EXPECT_THROW(MetricSpec::parse("map@10"), Error);
  EXPECT_THROW(MetricSpec::parse("ndcg@x"), Error);
}

TEST(Evaluate, ReportHasEveryQueryAndMean) {
  Qrels q;
  q.set("q1", "a", 1);
  q.set("q2", "b", 1);
  RunFile run = single_query_run({"a", "b"});
  add_ranking(run, "q2", {{"a", 1.0}, {"b", 0.5}});
  const auto report = evaluate(run, q, {MetricSpec::parse("ndcg@20"), MetricSpec::parse("p@1")});
  EXPECT_EQ(report.per_query.at("ndcg@20").size(), 2u);
  EXPECT_DOUBLE_EQ(report.mean.at("p@1"), 0.5);
  EXPECT_NE(report.to_table().find("all"), std::string::npos);
  EXPECT_EQ(report.to_json()["mean"]["p@1"].get<double>(), 0.5);
}

TEST(PermutationTest, IdenticalRunsGivePOne) {
  const std::vector<double> a{0.1, 0.5, 0.9};
  EXPECT_EQ(permutation_test(a, a, 1000, 1), 1.0);
}

TEST(PermutationTest, AgreesWithExhaustiveEnumeration) {
  Rng rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(8);
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform01();
      b[i] = a[i] - rng.uniform(-0.2, 0.5);
    }
    const double sampled = permutation_test(a, b, 100000, rng.next());
    EXPECT_NEAR(sampled, oracle_exhaustive_p(a, b), 0.01) << trial;
    EXPECT_EQ(permutation_test(a, b, 1000, 5), permutation_test(a, b, 1000, 5));
  }
  EXPECT_THROW(permutation_test(std::vector<double>{}, std::vector<double>{}, 10, 1), Error);
}

TEST(RunFile, FormatAndRoundTrip) {
  TempDir dir;
  RunFile run;
  run.tag = "mine";
  add_ranking(run, "q2", {{"d3", 2.5}, {"d1", 2.5}, {"d2", -1.0}});
  add_ranking(run, "q1", {{"d9", 0.123456789}});
  write_run(dir / "r.run", run);
  EXPECT_EQ(read_file(dir / "r.run").substr(0, 30), "q1 Q0 d9 1 0.123457 mine\nq2 Q0");
  const RunFile back = load_run(dir / "r.run");
  EXPECT_EQ(back.tag, "mine");
  ASSERT_EQ(back.queries.at("q2").size(), 3u);
  EXPECT_EQ(back.queries.at("q2")[0].doc_id, "d3");
  EXPECT_EQ(back.queries.at("q2")[2].rank, 3u);
  EXPECT_EQ(back.query_ids(), (std::vector<std::string>{"q1", "q2"}));
  EXPECT_EQ(back.candidates(2).at("q2"), (std::vector<std::string>{"d3", "d1"}));
  EXPECT_EQ(back.restricted_to({"q1"}).queries.size(), 1u);
}

TEST(RunFile, OrderedByRankColumnOnLoad) {
  TempDir dir;
  write_file(dir / "r.run", "q1 Q0 b 2 0.5 t\nq1 Q0 a 1 0.9 t\n");
  const RunFile run = load_run(dir / "r.run");
  EXPECT_EQ(run.queries.at("q1")[0].doc_id, "a");
  write_file(dir / "bad.run", "q1 Q0 a 1\n");
  EXPECT_THROW(load_run(dir / "bad.run"), ParseError);
}

TEST(RunFile, InvariantsAreEnforced) {
  RunFile run;
  EXPECT_THROW(add_ranking(run, "q", {{"a", 1.0}, {"b", 2.0}}), Error);
  EXPECT_THROW(add_ranking(run, "q", {{"a", 1.0}, {"a", 0.5}}), Error);
  RunFile bad;
  bad.queries["q"] = {{"a", 1.0, 2}};
  EXPECT_THROW(check_run(bad), Error);
}

namespace {

struct Fixture {
  Corpus corpus = make_corpus({{"a", "solar panel cost"},
                               {"b", "solar solar policy"},
                               {"c", "panel policy subsidy"},
                               {"d", "wind turbine"},
                               {"e", "solar wind panel policy"}});
  InvertedIndex index = InvertedIndex::build(corpus);
  QueryMap queries = index_queries({make_query("q1", "solar panel policy")});
  RunFile first = bm25_run(index, {queries.at("q1")}, 100);
};

std::vector<std::string> docs_of(const RunFile& run, const std::string& q) {
  std::vector<std::string> out;
  for (const auto& e : run.queries.at(q)) out.push_back(e.doc_id);
  return out;
}

}  // namespace

TEST(Rerank, DepthOneKeepsOrder) {
  Fixture f;
  const auto p = RankerParams::random(Arch::Linear, 0, 3, 1.0);
  const auto out = rerank(p, f.index, f.queries, f.first, 1);
  EXPECT_EQ(docs_of(out, "q1"), docs_of(f.first, "q1"));
}

TEST(Rerank, ConstantScoresFallBackToDocIdOrder) {
  Fixture f;
  const auto out = rerank(RankerParams::zeros(Arch::Linear), f.index, f.queries, f.first, 3);
  auto window = docs_of(f.first, "q1");
  const auto tail = std::vector<std::string>(window.begin() + 3, window.end());
  window.resize(3);
  std::sort(window.begin(), window.end());
  window.insert(window.end(), tail.begin(), tail.end());
  EXPECT_EQ(docs_of(out, "q1"), window);
  EXPECT_EQ(out.queries.at("q1")[3].score, -2.0);
  check_run(out);
}

TEST(Rerank, MatchesBruteForceSort) {
  Fixture f;
  ASSERT_EQ(f.first.queries.at("q1").size(), 4u);
  Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = RankerParams::random(Arch::Mlp, 4, rng.next(), 1.0);
    std::vector<std::pair<double, std::string>> scored;
    for (const auto& e : f.first.queries.at("q1")) {
      scored.emplace_back(-score(p, extract_features(f.queries.at("q1"), e.doc_id, f.index)), e.doc_id);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::string> expected;
    for (const auto& [_, id] : scored) expected.push_back(id);
    EXPECT_EQ(docs_of(rerank(p, f.index, f.queries, f.first, 100), "q1"), expected);
  }
  EXPECT_THROW(rerank(RankerParams::zeros(Arch::Linear), f.index, QueryMap{}, f.first, 10), Error);
}

TEST(Rrf, HandComputedScores) {
  RunFile r1 = single_query_run({"a", "b", "c"});
  RunFile r2 = single_query_run({"a", "c"});
  RunFile r3 = single_query_run({"d", "b"});
  add_ranking(r3, "q2", {{"z", 1.0}});
  const auto fused = rrf({r1, r2, r3}, 1.0);
  std::map<std::string, double> got;
  for (const auto& e : fused.queries.at("q1")) got[e.doc_id] = e.score;
  EXPECT_DOUBLE_EQ(got["a"], 1.0);                    // 1/2 + 1/2
  EXPECT_DOUBLE_EQ(got["b"], 1.0 / 3 + 1.0 / 3);       // rank 2 twice
  EXPECT_DOUBLE_EQ(got["c"], 1.0 / 4 + 1.0 / 3);
  EXPECT_DOUBLE_EQ(got["d"], 0.5);
  EXPECT_EQ(docs_of(fused, "q1"), (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_DOUBLE_EQ(fused.queries.at("q2")[0].score, 0.5);
}

TEST(Rrf, SelfFusionPreservesOrdering) {
  Fixture f;
  const auto fused = rrf({f.first, f.first});
  EXPECT_EQ(docs_of(fused, "q1"), docs_of(f.first, "q1"));
  EXPECT_THROW(rrf({f.first}), Error);
}

namespace {

SyntheticCollection small_collection(std::size_t n_queries, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_topics = 2;
  spec.docs_per_topic = 15;
  spec.n_queries = n_queries;
  spec.vocab_size = 400;
  spec.seed = seed;
  return generate_synthetic_collection(spec);
}

}  // namespace

TEST(CrossValidate, EveryQueryEvaluatedOnce) {
  const auto col = small_collection(10, 1);
  const auto index = InvertedIndex::build(col.corpus);
  const auto queries = index_queries(col.queries);
  const auto first = bm25_run(index, col.queries, 30);
  GeneratorConfig gen;
  gen.seed = 2;
  const auto triples = synthesize(col.corpus, index, gen);
  CvConfig cfg;
  cfg.folds = 5;
  cfg.depth = 30;
  cfg.train.steps = 20;
  const auto report = cross_validate(index, queries, col.qrels, first, triples, cfg);
  std::multiset<std::string> seen;
  for (const auto& fold : report.folds) seen.insert(fold.test_queries.begin(), fold.test_queries.end());
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 10u);
  EXPECT_EQ(report.run.queries.size(), 10u);
  EXPECT_EQ(report.pooled.per_query.at("ndcg@20").size(), 10u);
}

TEST(CrossValidate, ZeroStepsKeepInitialParams) {
  const auto col = small_collection(10, 3);
  const auto index = InvertedIndex::build(col.corpus);
  const auto first = bm25_run(index, col.queries, 30);
  GeneratorConfig gen;
  const auto triples = synthesize(col.corpus, index, gen);
  CvConfig cfg;
  cfg.train.steps = 0;
  cfg.depth = 30;
  const auto report = cross_validate(index, index_queries(col.queries), col.qrels, first, triples, cfg);
  ASSERT_EQ(report.folds.size(), 5u);
  for (const auto& fold : report.folds) EXPECT_EQ(fold.training.state.params, fold.init);
}

TEST(NoiseBench, SmallRunIsDeterministic) {
  NoiseBenchConfig cfg = default_noise_bench_config(3);
  cfg.n_seeds = 1;
  cfg.cv.train.steps = 20;
  const auto a = run_noise_bench(cfg);
  const auto b = run_noise_bench(cfg);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.to_text(), b.to_text());
  ASSERT_EQ(a.runs.size(), 1u);
  EXPECT_EQ(a.runs[0].n_flipped,
            static_cast<std::size_t>(std::llround(0.3 * static_cast<double>(a.runs[0].n_triples))));
  EXPECT_GT(a.runs[0].clean_weights.size() + a.runs[0].flipped_weights.size(), 0u);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_EQ(median({}), 0.0);
}
