#include "adaptrank/ranker.hpp"

#include <algorithm>
#include <cmath>

#include "adaptrank/error.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {

FeatureVector extract_features(const Tokens& query_tokens, DocNo doc, const InvertedIndex& index) {
  const Tokens terms = distinct_terms(query_tokens);
  if (terms.empty()) throw Error("cannot extract features for an empty query");

  double bm25 = 0.0;
  double matched_tf = 0.0;
  double present = 0.0;
  double idf_total = 0.0;
  double idf_matched = 0.0;
  double dot = 0.0;
  double query_sq = 0.0;
  for (const auto& term : terms) {
    const auto id = index.term_id(term);
    const double idf = id ? index.idf(*id) : index.idf(term);
    const std::uint32_t tf = id ? index.tf(doc, *id) : 0;
    idf_total += idf;
    query_sq += idf * idf;
    if (tf == 0) continue;
    bm25 += index.term_score(idf, tf, doc);
    matched_tf += tf;
    present += 1.0;
    idf_matched += idf;
    dot += idf * (tf * idf);
  }
  const double n_terms = static_cast<double>(terms.size());
  const double cosine = dot == 0.0 ? 0.0 : std::min(1.0, dot / (std::sqrt(query_sq) * index.doc_tfidf_norm(doc)));
  return {bm25,
          std::log1p(matched_tf),
          present / n_terms,
          idf_matched / idf_total,
          index.doc_len(doc) / index.avg_doc_len(),
          cosine};
}

FeatureVector extract_features(const Query& query, std::string_view doc_id,
                               const InvertedIndex& index) {
  return extract_features(query.tokens, index.require_doc(doc_id), index);
}

std::size_t RankerParams::param_count(Arch arch, std::size_t hidden) {
  return arch == Arch::Linear ? kNumFeatures + 1 : kNumFeatures * hidden + 2 * hidden + 1;
}

RankerParams RankerParams::zeros(Arch arch, std::size_t hidden) {
  if (arch == Arch::Linear) hidden = 0;
  return RankerParams(arch, hidden, std::vector<double>(param_count(arch, hidden), 0.0));
}

RankerParams RankerParams::random(Arch arch, std::size_t hidden, std::uint64_t seed, double scale) {
  RankerParams p = zeros(arch, hidden);
  Rng rng(seed);
  for (double& t : p.theta_) t = rng.uniform(-scale, scale);
  return p;
}

RankerParams::RankerParams(Arch arch, std::size_t hidden, std::vector<double> theta)
    : arch_(arch), hidden_(arch == Arch::Linear ? 0 : hidden), theta_(std::move(theta)) {
  if (arch_ == Arch::Mlp && hidden_ == 0) throw Error("mlp ranker needs a positive hidden width");
  if (theta_.size() != param_count(arch_, hidden_)) {
    throw Error("parameter vector of length " + std::to_string(theta_.size()) + ", expected " +
                std::to_string(param_count(arch_, hidden_)));
  }
  for (double t : theta_) {
    if (!std::isfinite(t)) throw Error("non-finite ranker parameter");
  }
}

namespace {

double linear_z(std::span<const double> th, const FeatureVector& x) {
  double z = th[kNumFeatures];
  for (std::size_t f = 0; f < kNumFeatures; ++f) z += th[f] * x[f];
  return z;
}

// Hidden activations of the mlp head into `act`; returns the pre-tanh output.
double mlp_z(std::span<const double> th, std::size_t h, const FeatureVector& x,
             std::vector<double>& act) {
  const std::size_t c0 = kNumFeatures * h;
  const std::size_t v0 = c0 + h;
  act.resize(h);
  double z = th[v0 + h];
  for (std::size_t k = 0; k < h; ++k) {
    double pre = th[c0 + k];
    for (std::size_t f = 0; f < kNumFeatures; ++f) pre += th[k * kNumFeatures + f] * x[f];
    act[k] = std::tanh(pre);
    z += th[v0 + k] * act[k];
  }
  return z;
}

}  // namespace

double score(const RankerParams& params, const FeatureVector& x) {
  if (params.arch() == Arch::Linear) return std::tanh(linear_z(params.theta(), x));
  std::vector<double> act;
  return std::tanh(mlp_z(params.theta(), params.hidden(), x, act));
}

double score_with_grad(const RankerParams& params, const FeatureVector& x, double scale,
                       std::span<double> grad) {
  if (grad.size() != params.size()) throw Error("gradient buffer does not match parameters");
  const auto th = params.theta();
  if (params.arch() == Arch::Linear) {
    const double f = std::tanh(linear_z(th, x));
    const double dz = scale * (1.0 - f * f);
    for (std::size_t i = 0; i < kNumFeatures; ++i) grad[i] += dz * x[i];
    grad[kNumFeatures] += dz;
    return f;
  }
  const std::size_t h = params.hidden();
  std::vector<double> act;
  const double f = std::tanh(mlp_z(th, h, x, act));
  const double dz = scale * (1.0 - f * f);
  const std::size_t c0 = kNumFeatures * h;
  const std::size_t v0 = c0 + h;
  grad[v0 + h] += dz;
  for (std::size_t k = 0; k < h; ++k) {
    grad[v0 + k] += dz * act[k];
    const double da = dz * th[v0 + k] * (1.0 - act[k] * act[k]);
    grad[c0 + k] += da;
    for (std::size_t i = 0; i < kNumFeatures; ++i) grad[k * kNumFeatures + i] += da * x[i];
  }
  return f;
}

PairExample make_example(const Tokens& query_tokens, std::string_view pos_doc_id,
                         std::string_view neg_doc_id, const InvertedIndex& index) {
  return {extract_features(query_tokens, index.require_doc(pos_doc_id), index),
          extract_features(query_tokens, index.require_doc(neg_doc_id), index)};
}

double margin(const RankerParams& params, const PairExample& example) {
  return score(params, example.pos) - score(params, example.neg);
}

double pairwise_loss(const RankerParams& params, const PairExample& example) {
  return std::max(0.0, 1.0 - margin(params, example));
}

Gradient loss_grad(const RankerParams& params, const PairExample& example) {
  Gradient g(params.size(), 0.0);
  if (1.0 - margin(params, example) <= 0.0) return g;
  score_with_grad(params, example.pos, -1.0, g);
  score_with_grad(params, example.neg, 1.0, g);
  return g;
}

std::vector<double> central_difference(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> theta, double eps) {
  if (!(eps > 0.0)) throw Error("finite-difference step must be positive");
  std::vector<double> point(theta.begin(), theta.end());
  std::vector<double> out(theta.size());
  for (std::size_t k = 0; k < point.size(); ++k) {
    const double base = point[k];
    point[k] = base + eps;
    const double up = objective(point);
    point[k] = base - eps;
    const double down = objective(point);
    point[k] = base;
    out[k] = (up - down) / (2.0 * eps);
  }
  return out;
}

Gradient finite_diff_grad(const RankerParams& params, const PairExample& example, double eps) {
  return central_difference(
      [&](std::span<const double> theta) {
        RankerParams p(params.arch(), params.hidden(), {theta.begin(), theta.end()});
        return pairwise_loss(p, example);
      },
      params.theta(), eps);
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw Error("relative_error: length mismatch");
  double diff = 0.0;
  double scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

nlohmann::json params_to_json(const RankerParams& params) {
  nlohmann::json j;  // keys sort as arch, h, theta
  j["arch"] = params.arch() == Arch::Linear ? "linear" : "mlp";
  j["h"] = params.hidden();
  j["theta"] = std::vector<double>(params.theta().begin(), params.theta().end());
  return j;
}

RankerParams params_from_json(const nlohmann::json& json) {
  try {
    const auto arch_name = json.at("arch").get<std::string>();
    Arch arch;
    if (arch_name == "linear") {
      arch = Arch::Linear;
    } else if (arch_name == "mlp") {
      arch = Arch::Mlp;
    } else {
      throw Error("unknown ranker arch '" + arch_name + "'");
    }
    return RankerParams(arch, json.value("h", std::size_t{0}), json.at("theta").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed ranker params: ") + e.what());
  }
}

}  // namespace adaptrank
