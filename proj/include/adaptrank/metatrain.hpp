#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "adaptrank/ranker.hpp"

namespace adaptrank {

struct OptimizerConfig {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double lr = 7e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double alpha = 0.1;            // pseudo-update step size
  double eta = 1.0;              // weight step size; cancels under normalization
  std::size_t synth_batch = 8;   // n
  std::size_t target_batch = 8;  // m
  std::size_t steps = 500;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-example weights of one synthetic batch: raw -> clipped -> normalized.
struct WeightVector {
  std::vector<double> raw;
  std::vector<double> clipped;
  std::vector<double> normalized;
};

struct WeightSummary {
  std::size_t step = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;
  double frac_zero = 0.0;
};

WeightSummary summarize(std::size_t step, std::span<const double> weights);

struct OptimizerState {
  std::size_t t = 0;  // adam steps actually taken
  std::vector<double> m;
  std::vector<double> v;
};

struct TrainerState {
  RankerParams params;
  std::size_t step = 0;
  OptimizerState optimizer;
  std::vector<WeightSummary> weight_log;

  explicit TrainerState(RankerParams init) : params(std::move(init)) {}
};

/// theta - alpha * sum_j w_j * grad l'_j(theta). Plain SGD whatever the
/// actual optimizer is.
RankerParams meta_forward(const RankerParams& params, std::span<const PairExample> synth,
                          std::span<const double> weights, double alpha);

/// Raw weights at w = 0: w~_j = eta * alpha * g_j . g_bar, where g_j is the
/// synthetic gradient and g_bar the mean target gradient, both at theta.
/// This is exactly -eta times the derivative of the mean target loss after
/// the pseudo-update, since g_j does not depend on w.
std::vector<double> meta_backward(const RankerParams& params, std::span<const PairExample> synth,
                                  std::span<const PairExample> target, double alpha, double eta);

/// Central-difference estimate of d(mean target loss)/dw_j at w = 0, going
/// through meta_forward for every perturbation.
std::vector<double> meta_grad_fd(const RankerParams& params, std::span<const PairExample> synth,
                                 std::span<const PairExample> target, double alpha, double eps);

/// Mean target loss at the pseudo-updated parameters theta~(w).
double meta_objective(const RankerParams& params, std::span<const PairExample> synth,
                      std::span<const PairExample> target, std::span<const double> weights,
                      double alpha);

/// Clip at zero and divide by the sum; all-zero when nothing survives.
WeightVector normalize_weights(std::span<const double> raw);

/// One update of the actual optimizer on sum_j w_j * l'_j(theta). Skipped
/// entirely (adam moments included) when every weight is zero.
void apply_weighted_update(TrainerState& state, std::span<const PairExample> synth,
                           std::span<const double> weights, const OptimizerConfig& optimizer);

/// Meta-reweighted step; logs and returns the weights it used.
WeightVector train_step(TrainerState& state, std::span<const PairExample> synth,
                        std::span<const PairExample> target, const TrainConfig& config);

/// Ablation step with weights 1/n.
void train_uniform(TrainerState& state, std::span<const PairExample> synth,
                   const TrainConfig& config);

enum class TrainMode { Meta, Uniform };

struct TrainResult {
  TrainerState state;
  /// Normalized weight each synthetic example received the last time it was
  /// batched; negative if it never was. Empty for uniform training.
  std::vector<double> last_weight;
};

/// Drives `config.steps` steps. Synthetic batches walk a fresh seeded
/// shuffle every epoch (the tail batch of an epoch may be short); target
/// batches cycle through their own seeded shuffle.
TrainResult train(const TrainConfig& config, RankerParams init,
                  std::span<const PairExample> synth, std::span<const PairExample> target,
                  TrainMode mode);

/// Params plus {"step": int, "optimizer": {...}}.
nlohmann::json checkpoint_to_json(const TrainerState& state, const OptimizerConfig& optimizer);
TrainerState checkpoint_from_json(const nlohmann::json& json);

/// CSV header step,mean,std,min,max,frac_zero.
void write_weight_log(const std::filesystem::path& path, std::span<const WeightSummary> log);

}  // namespace adaptrank
