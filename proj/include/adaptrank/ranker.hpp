#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "adaptrank/corpus.hpp"
#include "adaptrank/retrieval.hpp"

namespace adaptrank {

inline constexpr std::size_t kNumFeatures = 6;

/// Fixed order, part of the serialized-params contract:
///   0 bm25 score
///   1 ln(1 + sum of tf over matched distinct query terms)
///   2 fraction of distinct query terms present in the document
///   3 idf-weighted fraction of distinct query terms present
///   4 doc_len / avg_doc_len
///   5 cosine of the query (idf) and document (tf*idf) vectors
using FeatureVector = std::array<double, kNumFeatures>;

/// Throws Error on an empty query or a doc id missing from the index.
FeatureVector extract_features(const Tokens& query_tokens, DocNo doc, const InvertedIndex& index);
FeatureVector extract_features(const Query& query, std::string_view doc_id,
                               const InvertedIndex& index);

enum class Arch { Linear, Mlp };

/// Flat parameter vector of the scoring head.
///   linear: [w_0..w_5, b]
///   mlp:    [W (h x 6, row-major), c (h), v (h), b], hidden tanh
class RankerParams {
 public:
  static constexpr std::size_t kDefaultHidden = 8;

  static std::size_t param_count(Arch arch, std::size_t hidden);
  static RankerParams zeros(Arch arch, std::size_t hidden = kDefaultHidden);
  /// Uniform in [-scale, scale].
  static RankerParams random(Arch arch, std::size_t hidden, std::uint64_t seed,
                             double scale = 0.1);

  /// Throws Error if the length does not match the architecture.
  RankerParams(Arch arch, std::size_t hidden, std::vector<double> theta);

  Arch arch() const noexcept { return arch_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t size() const noexcept { return theta_.size(); }
  std::span<const double> theta() const noexcept { return theta_; }
  std::span<double> theta() noexcept { return theta_; }
  double operator[](std::size_t i) const { return theta_[i]; }
  double& operator[](std::size_t i) { return theta_[i]; }

  friend bool operator==(const RankerParams&, const RankerParams&) = default;

 private:
  Arch arch_;
  std::size_t hidden_;
  std::vector<double> theta_;
};

using Gradient = std::vector<double>;

/// f(x) in (-1, 1).
double score(const RankerParams& params, const FeatureVector& x);

/// Returns f(x) and adds scale * df/dtheta into `grad`.
double score_with_grad(const RankerParams& params, const FeatureVector& x, double scale,
                       std::span<double> grad);

/// Feature pair of one (query, pos, neg) instance.
struct PairExample {
  FeatureVector pos{};
  FeatureVector neg{};
};

PairExample make_example(const Tokens& query_tokens, std::string_view pos_doc_id,
                         std::string_view neg_doc_id, const InvertedIndex& index);

/// relu(1 - (f(pos) - f(neg))).
double pairwise_loss(const RankerParams& params, const PairExample& example);
double margin(const RankerParams& params, const PairExample& example);

/// Exact gradient of pairwise_loss; zero when the margin is >= 1.
Gradient loss_grad(const RankerParams& params, const PairExample& example);

/// Central differences of an arbitrary objective around theta.
std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> theta, double eps);

Gradient finite_diff_grad(const RankerParams& params, const PairExample& example, double eps);

/// ||a - b||_inf / max(||a||_inf, ||b||_inf, floor).
double relative_error(std::span<const double> a, std::span<const double> b,
                      double floor = 1e-12);

/// {"arch": "linear"|"mlp", "h": int, "theta": [...]}.
nlohmann::json params_to_json(const RankerParams& params);
/// Throws Error on a malformed object.
RankerParams params_from_json(const nlohmann::json& json);

}  // namespace adaptrank
