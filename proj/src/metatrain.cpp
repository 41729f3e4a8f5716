#include "adaptrank/metatrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "adaptrank/error.hpp"
#include "adaptrank/rng.hpp"

namespace adaptrank {
namespace {

std::vector<Gradient> example_grads(const RankerParams& params, std::span<const PairExample> batch) {
  std::vector<Gradient> grads;
  grads.reserve(batch.size());
  for (const auto& ex : batch) grads.push_back(loss_grad(params, ex));
  return grads;
}

Gradient mean_grad(const RankerParams& params, std::span<const PairExample> batch) {
  Gradient mean(params.size(), 0.0);
  for (const auto& ex : batch) {
    const Gradient g = loss_grad(params, ex);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& x : mean) x *= inv;
  return mean;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> raw_weights(const std::vector<Gradient>& synth_grads, const Gradient& target_mean,
                                double alpha, double eta) {
  std::vector<double> raw;
  raw.reserve(synth_grads.size());
  for (const auto& g : synth_grads) raw.push_back(eta * alpha * dot(g, target_mean));
  return raw;
}

// Optimizer step on sum_j w_j g_j; no-op when every weight is zero.
void update_from_grads(TrainerState& state, const std::vector<Gradient>& grads,
                       std::span<const double> weights, const OptimizerConfig& opt) {
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) return;
  auto theta = state.params.theta();
  Gradient total(theta.size(), 0.0);
  for (std::size_t j = 0; j < grads.size(); ++j) {
    if (weights[j] == 0.0) continue;
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += weights[j] * grads[j][i];
  }
  if (opt.kind == OptimizerConfig::Kind::Sgd) {
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= opt.lr * total[i];
    return;
  }
  auto& st = state.optimizer;
  if (st.m.size() != theta.size()) {
    st.m.assign(theta.size(), 0.0);
    st.v.assign(theta.size(), 0.0);
  }
  ++st.t;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    st.m[i] = opt.beta1 * st.m[i] + (1.0 - opt.beta1) * total[i];
    st.v[i] = opt.beta2 * st.v[i] + (1.0 - opt.beta2) * total[i] * total[i];
    theta[i] -= opt.lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + opt.eps);
  }
}

void require_nonempty(std::span<const PairExample> batch, const char* what) {
  if (batch.empty()) throw Error(std::string(what) + " batch is empty");
}

}  // namespace

void TrainConfig::validate() const {
  if (synth_batch < 1 || target_batch < 1) throw Error("batch sizes must be at least 1");
  if (!(alpha > 0.0) || !(eta > 0.0) || !(optimizer.lr > 0.0)) {
    throw Error("learning rates must be positive");
  }
  if (optimizer.kind == OptimizerConfig::Kind::Adam &&
      !(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 &&
        optimizer.beta2 < 1.0 && optimizer.eps > 0.0)) {
    throw Error("adam needs beta1, beta2 in [0, 1) and eps > 0");
  }
}

WeightSummary summarize(std::size_t step, std::span<const double> weights) {
  WeightSummary s;
  s.step = step;
  if (weights.empty()) return s;
  const double n = static_cast<double>(weights.size());
  s.mean = std::accumulate(weights.begin(), weights.end(), 0.0) / n;
  double sq = 0.0;
  for (double w : weights) sq += (w - s.mean) * (w - s.mean);
  s.std = std::sqrt(sq / n);
  const auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
  s.min = *lo;
  s.max = *hi;
  s.frac_zero = static_cast<double>(std::count(weights.begin(), weights.end(), 0.0)) / n;
  return s;
}

RankerParams meta_forward(const RankerParams& params, std::span<const PairExample> synth,
                          std::span<const double> weights, double alpha) {
  if (weights.size() != synth.size()) {
    throw Error(fmt::format("{} weights for a batch of {}", weights.size(), synth.size()));
  }
  RankerParams out = params;
  auto theta = out.theta();
  for (std::size_t j = 0; j < synth.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const Gradient g = loss_grad(params, synth[j]);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= alpha * weights[j] * g[i];
  }
  return out;
}

std::vector<double> meta_backward(const RankerParams& params, std::span<const PairExample> synth,
                                  std::span<const PairExample> target, double alpha, double eta) {
  require_nonempty(synth, "synthetic");
  require_nonempty(target, "target");
  return raw_weights(example_grads(params, synth), mean_grad(params, target), alpha, eta);
}

double meta_objective(const RankerParams& params, std::span<const PairExample> synth,
                      std::span<const PairExample> target, std::span<const double> weights,
                      double alpha) {
  const RankerParams moved = meta_forward(params, synth, weights, alpha);
  double loss = 0.0;
  for (const auto& ex : target) loss += pairwise_loss(moved, ex);
  return loss / static_cast<double>(target.size());
}

std::vector<double> meta_grad_fd(const RankerParams& params, std::span<const PairExample> synth,
                                 std::span<const PairExample> target, double alpha, double eps) {
  require_nonempty(target, "target");
  const std::vector<double> zero(synth.size(), 0.0);
  return central_difference(
      [&](std::span<const double> w) { return meta_objective(params, synth, target, w, alpha); },
      zero, eps);
}

WeightVector normalize_weights(std::span<const double> raw) {
  WeightVector w;
  w.raw.assign(raw.begin(), raw.end());
  w.clipped.reserve(raw.size());
  double sum = 0.0;
  for (double r : raw) {
    w.clipped.push_back(std::max(0.0, r));
    sum += w.clipped.back();
  }
  const double delta = sum == 0.0 ? 1.0 : 0.0;
  w.normalized.reserve(raw.size());
  for (double c : w.clipped) w.normalized.push_back(c / (sum + delta));
  return w;
}

void apply_weighted_update(TrainerState& state, std::span<const PairExample> synth,
                           std::span<const double> weights, const OptimizerConfig& optimizer) {
  if (weights.size() != synth.size()) {
    throw Error(fmt::format("{} weights for a batch of {}", weights.size(), synth.size()));
  }
  update_from_grads(state, example_grads(state.params, synth), weights, optimizer);
}

WeightVector train_step(TrainerState& state, std::span<const PairExample> synth,
                        std::span<const PairExample> target, const TrainConfig& config) {
  require_nonempty(synth, "synthetic");
  require_nonempty(target, "target");
  const auto grads = example_grads(state.params, synth);
  WeightVector w = normalize_weights(
      raw_weights(grads, mean_grad(state.params, target), config.alpha, config.eta));
  update_from_grads(state, grads, w.normalized, config.optimizer);
  ++state.step;
  state.weight_log.push_back(summarize(state.step, w.normalized));
  return w;
}

void train_uniform(TrainerState& state, std::span<const PairExample> synth,
                   const TrainConfig& config) {
  require_nonempty(synth, "synthetic");
  const std::vector<double> w(synth.size(), 1.0 / static_cast<double>(synth.size()));
  update_from_grads(state, example_grads(state.params, synth), w, config.optimizer);
  ++state.step;
}

namespace {

// Endless stream of indices in [0, n), reshuffled each pass.
class EpochStream {
 public:
  EpochStream(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  // Up to `size` indices, never crossing a pass boundary.
  std::vector<std::size_t> next_batch(std::size_t size) {
    if (cursor_ == 0) rng_.shuffle(std::span(order_));
    const std::size_t take = std::min(size, order_.size() - cursor_);
    std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(cursor_ + take));
    cursor_ = (cursor_ + take) % order_.size();
    return out;
  }

  // Exactly min(size, n) indices, continuing into the next pass when needed.
  std::vector<std::size_t> next_cyclic(std::size_t size) {
    std::vector<std::size_t> out;
    const std::size_t want = std::min(size, order_.size());
    while (out.size() < want) {
      auto part = next_batch(want - out.size());
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }

 private:
  std::vector<std::size_t> order_;
  Rng rng_;
  std::size_t cursor_ = 0;
};

std::vector<PairExample> gather(std::span<const PairExample> all, const std::vector<std::size_t>& idx) {
  std::vector<PairExample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& config, RankerParams init, std::span<const PairExample> synth,
                  std::span<const PairExample> target, TrainMode mode) {
  config.validate();
  TrainResult result{TrainerState(std::move(init)), {}};
  if (config.steps == 0) return result;
  require_nonempty(synth, "synthetic");
  if (mode == TrainMode::Meta) {
    require_nonempty(target, "target");
    result.last_weight.assign(synth.size(), -1.0);
  }
  EpochStream synth_stream(synth.size(), mix_seed(config.seed, 11));
  EpochStream target_stream(std::max<std::size_t>(target.size(), 1), mix_seed(config.seed, 12));
  for (std::size_t s = 0; s < config.steps; ++s) {
    const auto idx = synth_stream.next_batch(config.synth_batch);
    const auto batch = gather(synth, idx);
    if (mode == TrainMode::Uniform) {
      train_uniform(result.state, batch, config);
      continue;
    }
    const auto target_batch = gather(target, target_stream.next_cyclic(config.target_batch));
    const WeightVector w = train_step(result.state, batch, target_batch, config);
    for (std::size_t j = 0; j < idx.size(); ++j) result.last_weight[idx[j]] = w.normalized[j];
  }
  return result;
}

nlohmann::json checkpoint_to_json(const TrainerState& state, const OptimizerConfig& optimizer) {
  nlohmann::json j = params_to_json(state.params);
  j["step"] = state.step;
  nlohmann::json opt;
  opt["kind"] = optimizer.kind == OptimizerConfig::Kind::Sgd ? "sgd" : "adam";
  opt["lr"] = optimizer.lr;
  if (optimizer.kind == OptimizerConfig::Kind::Adam) {
    opt["beta1"] = optimizer.beta1;
    opt["beta2"] = optimizer.beta2;
    opt["eps"] = optimizer.eps;
    opt["t"] = state.optimizer.t;
    opt["m"] = state.optimizer.m;
    opt["v"] = state.optimizer.v;
  }
  j["optimizer"] = std::move(opt);
  return j;
}

TrainerState checkpoint_from_json(const nlohmann::json& json) {
  TrainerState state(params_from_json(json));
  try {
    state.step = json.value("step", std::size_t{0});
    if (auto opt = json.find("optimizer"); opt != json.end()) {
      state.optimizer.t = opt->value("t", std::size_t{0});
      state.optimizer.m = opt->value("m", std::vector<double>{});
      state.optimizer.v = opt->value("v", std::vector<double>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed checkpoint: ") + e.what());
  }
  return state;
}

void write_weight_log(const std::filesystem::path& path, std::span<const WeightSummary> log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,mean,std,min,max,frac_zero\n";
  for (const auto& s : log) {
    out << fmt::format("{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", s.step, s.mean, s.std, s.min,
                       s.max, s.frac_zero);
  }
}

}  // namespace adaptrank
