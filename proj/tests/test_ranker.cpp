#include <gtest/gtest.h>

#include <cmath>

#include "adaptrank/error.hpp"
#include "adaptrank/ranker.hpp"
#include "adaptrank/rng.hpp"
#include "random_cases.hpp"
#include "support.hpp"

using namespace adaptrank;
using testing_support::make_corpus;

namespace {

RankerParams linear(std::vector<double> w, double b = 0.0) {
  w.resize(kNumFeatures, 0.0);
  w.push_back(b);
  return RankerParams(Arch::Linear, 0, w);
}

FeatureVector first(double v) {
  FeatureVector x{};
  x[0] = v;
  return x;
}

}  // namespace

TEST(Features, NoOverlap) {
  const auto c = make_corpus({{"d1", "a b c"}, {"d2", "x y"}, {"d3", "x"}});
  const auto index = InvertedIndex::build(c);
  const auto f = extract_features({"x"}, index.require_doc("d1"), index);
  EXPECT_EQ(f[0], 0.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_EQ(f[2], 0.0);
  EXPECT_EQ(f[3], 0.0);
  EXPECT_DOUBLE_EQ(f[4], 3.0 / 2.0);
  EXPECT_EQ(f[5], 0.0);
}

TEST(Features, FullOverlapHasUnitCoverage) {
  const auto c = make_corpus({{"d1", "a b b"}, {"d2", "b c"}});
  const auto index = InvertedIndex::build(c);
  const auto f = extract_features(c[0].tokens, 0, index);
  EXPECT_DOUBLE_EQ(f[2], 1.0);
  EXPECT_DOUBLE_EQ(f[3], 1.0);
}

TEST(Features, TwoDocToyCorpusByHand) {
  const auto c = make_corpus({{"d1", "k k m"}, {"d2", "k n n n n"}});
  const auto index = InvertedIndex::build(c);
  const double avg = 4.0;
  const double idf_k = std::log(1.0 + 0.5 / 2.5);
  const double idf_m = std::log(1.0 + 1.5 / 1.5);
  const double idf_n = idf_m;
  const double bm25 = idf_k * 2.0 * 1.9 / (2.0 + 0.9 * (0.6 + 0.4 * 3.0 / avg));
  const double norm = std::sqrt(std::pow(2.0 * idf_k, 2) + std::pow(idf_m, 2));
  const auto f = extract_features(make_query("q", "k"), "d1", index);
  EXPECT_NEAR(f[0], bm25, 1e-12);
  EXPECT_NEAR(f[1], std::log(3.0), 1e-12);
  EXPECT_NEAR(f[2], 1.0, 1e-12);
  EXPECT_NEAR(f[3], 1.0, 1e-12);
  EXPECT_NEAR(f[4], 3.0 / avg, 1e-12);
  EXPECT_NEAR(f[5], idf_k * 2.0 * idf_k / (idf_k * norm), 1e-12);

  // Two-term query, one term missing from d2.
  const auto g = extract_features(make_query("q", "k m"), "d2", index);
  EXPECT_NEAR(g[2], 0.5, 1e-12);
  EXPECT_NEAR(g[3], idf_k / (idf_k + idf_m), 1e-12);
  const double norm2 = std::sqrt(idf_k * idf_k + std::pow(4.0 * idf_n, 2));
  EXPECT_NEAR(g[5], idf_k * idf_k / (std::sqrt(idf_k * idf_k + idf_m * idf_m) * norm2), 1e-12);
  EXPECT_THROW(extract_features(Tokens{}, 0, index), Error);
  EXPECT_THROW(extract_features(make_query("q", "k"), "nope", index), Error);
}

TEST(Score, ZeroParamsGiveZero) {
  Rng rng(1);
  EXPECT_EQ(score(RankerParams::zeros(Arch::Linear), testing_support::random_features(rng)), 0.0);
  EXPECT_EQ(score(RankerParams::zeros(Arch::Mlp, 4), testing_support::random_features(rng)), 0.0);
}

TEST(Score, LinearHeadIsTanh) {
  EXPECT_NEAR(score(linear({1.0}), first(0.5)), 0.46212, 5e-6);
  EXPECT_DOUBLE_EQ(score(linear({1.0}), first(0.5)), std::tanh(0.5));
}

TEST(Score, StaysInsideOpenUnitInterval) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const auto p = testing_support::random_params(rng, 3.0);
    const double s = score(p, testing_support::random_features(rng));
    EXPECT_LT(std::abs(s), 1.0);
  }
}

TEST(Loss, WorkedExamples) {
  const auto p = linear({1.0});
  EXPECT_NEAR(pairwise_loss(p, {first(std::atanh(0.8)), first(std::atanh(0.3))}), 0.5, 1e-12);
  EXPECT_NEAR(pairwise_loss(p, {first(0.4), first(0.4)}), 1.0, 0.0);
  const PairExample satisfied{first(std::atanh(0.9)), first(std::atanh(-0.5))};
  EXPECT_NEAR(margin(p, satisfied), 1.4, 1e-12);
  EXPECT_EQ(pairwise_loss(p, satisfied), 0.0);
}

TEST(Grad, InactiveHingeIsZero) {
  const auto p = linear({1.0});
  const auto g = loss_grad(p, {first(std::atanh(0.9)), first(std::atanh(-0.5))});
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Grad, OneFeatureLinearByHand) {
  const auto p = linear({0.7}, 0.1);
  const double xp = 0.9;
  const double xn = -0.4;
  const double fp = std::tanh(0.7 * xp + 0.1);
  const double fn = std::tanh(0.7 * xn + 0.1);
  const auto g = loss_grad(p, {first(xp), first(xn)});
  EXPECT_NEAR(g[0], -(1 - fp * fp) * xp + (1 - fn * fn) * xn, 1e-15);
  EXPECT_NEAR(g[kNumFeatures], -(1 - fp * fp) + (1 - fn * fn), 1e-15);
  for (std::size_t i = 1; i < kNumFeatures; ++i) EXPECT_EQ(g[i], 0.0);
  EXPECT_LT(relative_error(g, finite_diff_grad(p, {first(xp), first(xn)}, 1e-5)), 1e-8);
}

TEST(Grad, MatchesFiniteDifferencesOnRandomCases) {
  Rng rng(3);
  int checked = 0;
  while (checked < 200) {
    const auto p = testing_support::random_params(rng);
    const auto ex = testing_support::random_example(rng);
    if (std::abs(margin(p, ex) - 1.0) <= 1e-3) continue;
    EXPECT_LE(relative_error(loss_grad(p, ex), finite_diff_grad(p, ex, 1e-5)), 1e-6);
    ++checked;
  }
}

TEST(FiniteDiff, ExactOnQuadratics) {
  const std::vector<double> theta{0.3, -1.2, 2.5};
  const auto grad = central_difference(
      [](std::span<const double> t) { return 3 * t[0] * t[0] + t[0] * t[1] - 0.5 * t[2] * t[2] + t[2]; },
      theta, 1e-3);
  EXPECT_NEAR(grad[0], 6 * 0.3 - 1.2, 1e-9);
  EXPECT_NEAR(grad[1], 0.3, 1e-9);
  EXPECT_NEAR(grad[2], -2.5 + 1, 1e-9);
}

TEST(FiniteDiff, SymmetricTripleAtZeroHasZeroGradient) {
  Rng rng(4);
  const auto x = testing_support::random_features(rng);
  for (auto arch : {Arch::Linear, Arch::Mlp}) {
    const auto p = RankerParams::zeros(arch, 3);
    for (double v : finite_diff_grad(p, {x, x}, 1e-5)) EXPECT_EQ(v, 0.0);
    for (double v : loss_grad(p, {x, x})) EXPECT_EQ(v, 0.0);
  }
}

TEST(RelativeError, IsInfinityNormRatio) {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0, 2.5};
  EXPECT_DOUBLE_EQ(relative_error(a, b), 0.5 / 2.5);
  const std::vector<double> z{0.0, 0.0};
  EXPECT_EQ(relative_error(z, z), 0.0);
}

TEST(Params, LayoutAndJsonRoundTrip) {
  EXPECT_EQ(RankerParams::param_count(Arch::Linear, 0), 7u);
  EXPECT_EQ(RankerParams::param_count(Arch::Mlp, 4), 4u * 6 + 4 + 4 + 1);
  EXPECT_THROW(RankerParams(Arch::Linear, 0, {1.0, 2.0}), Error);
  const auto p = RankerParams::random(Arch::Mlp, 5, 99, 0.3);
  for (double v : p.theta()) EXPECT_LE(std::abs(v), 0.3);
  EXPECT_EQ(params_from_json(params_to_json(p)), p);
  EXPECT_EQ(RankerParams::random(Arch::Mlp, 5, 99, 0.3), p);
  EXPECT_THROW(params_from_json(nlohmann::json{{"arch", "tree"}}), Error);
  EXPECT_THROW(params_from_json(nlohmann::json{{"arch", "linear"}, {"h", 0}, {"theta", {1, 2}}}), Error);
}
