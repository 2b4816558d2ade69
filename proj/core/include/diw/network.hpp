// SPDX-License-Identifier: Apache-2.0
//
// Dense feedforward classifier: forward pass, softmax cross-entropy,
// backpropagation of a per-example weighted mean loss, and SGD/Adam updates.
// Everything runs in double precision and is a pure function of its explicit
// inputs and seeds.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "diw/weights.hpp"

namespace diw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LossVector = Eigen::VectorXd;

enum class Activation { kRelu, kTanh };
enum class Mode { kTraining, kEvaluation };

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out

  Eigen::Index in_width() const { return weight.cols(); }
  Eigen::Index out_width() const { return weight.rows(); }
};

/// Parameters of the classifier f_theta. The activation is applied after every
/// layer except the last; dropout (inverted) is applied to hidden activations
/// in training mode only.
struct NetworkParams {
  std::vector<DenseLayer> layers;
  double dropout_rate = 0.0;
  Activation activation = Activation::kRelu;
  std::int64_t step_count = 0;

  Eigen::Index input_width() const;
  Eigen::Index output_width() const;
  /// Width of the penultimate layer's output (the hidden-feature width).
  Eigen::Index penultimate_width() const;

  /// Throws ConfigError unless layer dimensions chain and entries are finite.
  void validate() const;
};

/// He-style uniform initialization: weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// biases zero. `widths` lists every layer width including input and output.
NetworkParams init_network(std::span<const int> widths, std::uint64_t seed,
                           double dropout_rate = 0.0, Activation activation = Activation::kRelu);

struct ForwardCache {
  Mode mode = Mode::kEvaluation;
  std::vector<Matrix> layer_inputs;     // input to layer l, n x in_l
  std::vector<Matrix> pre_activations;  // n x out_l
  std::vector<Matrix> dropout_masks;    // hidden layers only; empty in evaluation mode
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

/// Runs the network on `inputs` (n x d). Evaluation mode is deterministic and
/// ignores `rng_seed`; training mode draws dropout masks from it.
ForwardResult forward(const NetworkParams& params, const Matrix& inputs, Mode mode,
                      std::uint64_t rng_seed = 0);

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

/// Entry i is -log softmax(logits_i)[labels_i]. Labels are 0-based.
LossVector softmax_cross_entropy(const Matrix& logits, std::span<const int> labels);

using Gradients = std::vector<DenseLayer>;

/// Gradient of (1/n) * sum_i weights_i * loss_i with the weights held
/// constant.
Gradients backward_weighted(const NetworkParams& params, const ForwardCache& cache,
                            std::span<const int> labels, const Eigen::VectorXd& weights);

inline Gradients backward_weighted(const NetworkParams& params, const ForwardCache& cache,
                                   std::span<const int> labels, const WeightVector& weights) {
  return backward_weighted(params, cache, labels, weights.values);
}

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double momentum = 0.0;  // SGD only
  // Step decay: lr * factor^floor(epoch / every). every == 0 disables decay.
  double lr_decay_factor = 1.0;
  int lr_decay_every = 0;

  double learning_rate_at(int epoch) const;
};

struct OptimizerState {
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  std::int64_t steps = 0;
};

/// Applies one update in place. SGD: p <- p - lr * (g + decay * p) (with
/// optional heavy-ball momentum); Adam: bias-corrected moments with the decay
/// folded into the gradient. Throws NumericError naming the layer when a
/// gradient entry is nonfinite.
void optimizer_step(NetworkParams& params, const Gradients& grads, OptimizerState& state,
                    const OptimizerConfig& config, double learning_rate);

inline void optimizer_step(NetworkParams& params, const Gradients& grads, OptimizerState& state,
                           const OptimizerConfig& config) {
  optimizer_step(params, grads, state, config, config.learning_rate);
}

/// Penultimate-layer activations in evaluation mode (n x penultimate_width).
Matrix hidden_features(const NetworkParams& params, const Matrix& inputs);

/// Index of the largest logit per row, lowest index on ties.
std::vector<int> predict(const NetworkParams& params, const Matrix& inputs);

}  // namespace diw
