#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "alrt/core.hpp"
#include "alrt/preprocess.hpp"

namespace alrt {

/// Weights of the single-layer Elman recurrent classifier:
///   h_t = tanh(W_xh x_t + W_hh h_{t-1} + b_h),  h_{-1} = 0
///   p_t = sigmoid(w_hy . h_t + b_y)
struct ModelParams {
  std::size_t hidden_dim = 0;
  std::size_t input_dim = 0;
  Matrix w_xh;                // H x F
  Matrix w_hh;                // H x H
  std::vector<double> b_h;    // H
  std::vector<double> w_hy;   // H
  double b_y = 0.0;
};

/// One per-timestep class-1 probability, strictly inside (0, 1).
using SequenceProbabilities = std::vector<double>;

inline constexpr double kProbEpsilon = 1e-12;

struct ForwardCache {
  Matrix hidden;               // T x H
  SequenceProbabilities probs; // length T
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 5;
  std::uint64_t rng_seed = 0;
  std::optional<double> gradient_clip = 5.0;  // global norm; nullopt disables
  ClassWeights class_weights;

  void validate() const {
    if (learning_rate < 0.0) throw ConfigError("learning_rate must be >= 0");
    if (epochs <= 0) throw ConfigError("epochs must be positive");
    if (gradient_clip && *gradient_clip <= 0.0)
      throw ConfigError("gradient_clip must be positive");
  }
};

/// Uniform init in (-1/sqrt(fan_in), 1/sqrt(fan_in)) per matrix, zero biases.
ModelParams init_params(std::size_t hidden_dim, std::size_t input_dim,
                        std::uint64_t rng_seed);

SequenceProbabilities forward(const ModelParams& params, const Matrix& sequence);
ForwardCache forward_cached(const ModelParams& params, const Matrix& sequence);

/// Class-weighted binary cross entropy, mean over timesteps. Probabilities
/// are clamped to [kProbEpsilon, 1 - kProbEpsilon] so the loss stays finite.
double sequence_loss(const SequenceProbabilities& probs,
                     const std::vector<int>& labels, const ClassWeights& weights);

/// Exact gradient of sequence_loss(forward(...)) via backpropagation through
/// time. Result has ModelParams shape.
ModelParams backward(const ModelParams& params, const Matrix& sequence,
                     const std::vector<int>& labels, const ClassWeights& weights,
                     const ForwardCache& cache);

struct TrainTrace {
  std::vector<double> epoch_mean_loss;  // one entry per epoch, pre-update losses
};

/// Per-sequence (batch size 1) SGD for config.epochs passes. Visit order is
/// reshuffled every epoch from a seed derived as (rng_seed, "shuffle",
/// epoch_offset + epoch), so resumed training continues the same stream.
TrainTrace train(ModelParams& params,
                 const std::vector<const FeatureSequence*>& dataset,
                 const TrainConfig& config, int epoch_offset = 0);
TrainTrace train(ModelParams& params, const std::vector<FeatureSequence>& dataset,
                 const TrainConfig& config, int epoch_offset = 0);

// Flat parameter view, in the fixed order W_xh, W_hh, b_h, w_hy, b_y.
std::size_t param_count(const ModelParams& params);
double get_param(const ModelParams& params, std::size_t index);
void set_param(ModelParams& params, std::size_t index, double value);
double global_grad_norm(const ModelParams& grad);

/// Checkpoint artifact: dimensions, row-major weights, seed and train config.
void save_checkpoint(const ModelParams& params, const TrainConfig& config,
                     const std::filesystem::path& file);
struct Checkpoint {
  ModelParams params;
  TrainConfig config;
};
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace alrt
