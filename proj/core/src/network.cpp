// SPDX-License-Identifier: Apache-2.0
#include "diw/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "diw/error.hpp"
#include "diw/rng.hpp"

namespace diw {
namespace {

Matrix activate(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
  }
  return z;
}

// Derivative of the activation evaluated from the pre-activation.
Matrix activation_grad(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kTanh:
      return (1.0 - z.array().tanh().square()).matrix();
  }
  return Matrix::Ones(z.rows(), z.cols());
}

void check_labels(std::span<const int> labels, Eigen::Index n, Eigen::Index k) {
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw InputError("label count " + std::to_string(labels.size()) + " does not match " +
                     std::to_string(n) + " rows");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) {
      throw InputError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                       " is outside [0, " + std::to_string(k) + ")");
    }
  }
}

}  // namespace

Eigen::Index NetworkParams::input_width() const {
  return layers.empty() ? 0 : layers.front().in_width();
}

Eigen::Index NetworkParams::output_width() const {
  return layers.empty() ? 0 : layers.back().out_width();
}

Eigen::Index NetworkParams::penultimate_width() const {
  if (layers.size() < 2) {
    throw ConfigError("network with fewer than 2 layers has no hidden features");
  }
  return layers[layers.size() - 2].out_width();
}

void NetworkParams::validate() const {
  if (layers.empty()) throw ConfigError("network has no layers");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.out_width()) {
      throw ConfigError("layer " + std::to_string(l) + " bias width does not match weight rows");
    }
    if (l + 1 < layers.size() && layers[l + 1].in_width() != layer.out_width()) {
      throw ConfigError("layer " + std::to_string(l) + " output width " +
                        std::to_string(layer.out_width()) + " does not chain into layer " +
                        std::to_string(l + 1) + " input width " +
                        std::to_string(layers[l + 1].in_width()));
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw ConfigError("layer " + std::to_string(l) + " has nonfinite parameters");
    }
  }
}

NetworkParams init_network(std::span<const int> widths, std::uint64_t seed, double dropout_rate,
                           Activation activation) {
  if (widths.size() < 2) throw ConfigError("network needs at least input and output widths");
  for (int w : widths) {
    if (w < 1) throw ConfigError("layer widths must be positive");
  }
  NetworkParams params;
  params.dropout_rate = dropout_rate;
  params.activation = activation;
  Engine engine = make_engine(seed, streams::kInit);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(engine);
    }
    params.layers.push_back(std::move(layer));
  }
  params.validate();
  return params;
}

ForwardResult forward(const NetworkParams& params, const Matrix& inputs, Mode mode,
                      std::uint64_t rng_seed) {
  if (params.layers.empty()) throw ConfigError("network has no layers");
  if (inputs.cols() != params.input_width()) {
    throw ConfigError("input width " + std::to_string(inputs.cols()) +
                      " does not match network input width " +
                      std::to_string(params.input_width()));
  }
  const bool use_dropout = mode == Mode::kTraining && params.dropout_rate > 0.0;
  ForwardResult result;
  result.cache.mode = mode;
  const std::size_t depth = params.layers.size();
  result.cache.layer_inputs.reserve(depth);
  result.cache.pre_activations.reserve(depth);

  Engine engine(rng_seed);
  std::bernoulli_distribution keep(1.0 - params.dropout_rate);
  const double scale = use_dropout ? 1.0 / (1.0 - params.dropout_rate) : 1.0;

  Matrix current = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& layer = params.layers[l];
    Matrix z = current * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    result.cache.layer_inputs.push_back(std::move(current));
    if (l + 1 == depth) {
      result.logits = z;
      result.cache.pre_activations.push_back(std::move(z));
      break;
    }
    Matrix a = activate(z, params.activation);
    if (use_dropout) {
      Matrix mask(a.rows(), a.cols());
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = keep(engine) ? scale : 0.0;
      }
      a.array() *= mask.array();
      result.cache.dropout_masks.push_back(std::move(mask));
    }
    result.cache.pre_activations.push_back(std::move(z));
    current = std::move(a);
  }
  return result;
}

Matrix softmax(const Matrix& logits) {
  Matrix out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

LossVector softmax_cross_entropy(const Matrix& logits, std::span<const int> labels) {
  check_labels(labels, logits.rows(), logits.cols());
  LossVector loss(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double log_sum = std::log((logits.row(i).array() - m).exp().sum()) + m;
    // Clamp tiny negative round-off so the loss stays nonnegative.
    loss[i] = std::max(0.0, log_sum - logits(i, labels[static_cast<std::size_t>(i)]));
  }
  return loss;
}

Gradients backward_weighted(const NetworkParams& params, const ForwardCache& cache,
                            std::span<const int> labels, const Eigen::VectorXd& weights) {
  const std::size_t depth = params.layers.size();
  if (cache.layer_inputs.size() != depth || cache.pre_activations.size() != depth) {
    throw InternalError("forward cache depth does not match network depth");
  }
  const bool has_masks = !cache.dropout_masks.empty();
  if (has_masks && cache.dropout_masks.size() + 1 != depth) {
    throw InternalError("forward cache dropout masks do not match hidden layers");
  }
  const Matrix& logits = cache.pre_activations.back();
  const Eigen::Index n = logits.rows();
  if (logits.cols() != params.output_width()) {
    throw InternalError("forward cache logits width does not match network output");
  }
  check_labels(labels, n, logits.cols());
  if (weights.size() != n) {
    throw InputError("weight count " + std::to_string(weights.size()) + " does not match batch of " +
                     std::to_string(n));
  }

  // d/dlogits of (1/n) sum_i w_i * CE_i = (w_i / n) * (softmax_i - onehot_i).
  Matrix delta = softmax(logits);
  for (Eigen::Index i = 0; i < n; ++i) {
    delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    delta.row(i) *= weights[i] / static_cast<double>(n);
  }

  Gradients grads(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = params.layers[l];
    const Matrix& input = cache.layer_inputs[l];
    if (input.cols() != layer.in_width() || input.rows() != n) {
      throw InternalError("forward cache layer " + std::to_string(l) + " does not match params");
    }
    grads[l].weight = delta.transpose() * input;
    grads[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * layer.weight;
    if (has_masks) upstream.array() *= cache.dropout_masks[l - 1].array();
    upstream.array() *= activation_grad(cache.pre_activations[l - 1], params.activation).array();
    delta = std::move(upstream);
  }
  return grads;
}

double OptimizerConfig::learning_rate_at(int epoch) const {
  if (lr_decay_every <= 0) return learning_rate;
  return learning_rate * std::pow(lr_decay_factor, epoch / lr_decay_every);
}

void optimizer_step(NetworkParams& params, const Gradients& grads, OptimizerState& state,
                    const OptimizerConfig& config, double learning_rate) {
  const std::size_t depth = params.layers.size();
  if (grads.size() != depth) throw InternalError("gradient depth does not match network depth");
  for (std::size_t l = 0; l < depth; ++l) {
    if (grads[l].weight.rows() != params.layers[l].weight.rows() ||
        grads[l].weight.cols() != params.layers[l].weight.cols() ||
        grads[l].bias.size() != params.layers[l].bias.size()) {
      throw InternalError("gradient shape mismatch at layer " + std::to_string(l));
    }
    if (!grads[l].weight.allFinite() || !grads[l].bias.allFinite()) {
      throw NumericError("nonfinite gradient at layer " + std::to_string(l));
    }
  }

  const bool first_call = state.first_moment.size() != depth;
  if (first_call) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& layer : params.layers) {
      DenseLayer zero{Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                      Vector::Zero(layer.bias.size())};
      state.first_moment.push_back(zero);
      state.second_moment.push_back(std::move(zero));
    }
  }
  ++state.steps;

  for (std::size_t l = 0; l < depth; ++l) {
    auto& layer = params.layers[l];
    Matrix gw = grads[l].weight + config.weight_decay * layer.weight;
    Vector gb = grads[l].bias + config.weight_decay * layer.bias;
    auto& m = state.first_moment[l];
    auto& v = state.second_moment[l];
    switch (config.kind) {
      case OptimizerKind::kSgd:
        if (config.momentum > 0.0) {
          m.weight = config.momentum * m.weight + gw;
          m.bias = config.momentum * m.bias + gb;
          layer.weight -= learning_rate * m.weight;
          layer.bias -= learning_rate * m.bias;
        } else {
          layer.weight -= learning_rate * gw;
          layer.bias -= learning_rate * gb;
        }
        break;
      case OptimizerKind::kAdam: {
        const double b1 = config.beta1;
        const double b2 = config.beta2;
        const double t = static_cast<double>(state.steps);
        const double c1 = 1.0 - std::pow(b1, t);
        const double c2 = 1.0 - std::pow(b2, t);
        m.weight = b1 * m.weight + (1.0 - b1) * gw;
        m.bias = b1 * m.bias + (1.0 - b1) * gb;
        v.weight = b2 * v.weight + (1.0 - b2) * gw.cwiseAbs2();
        v.bias = b2 * v.bias + (1.0 - b2) * gb.cwiseAbs2();
        layer.weight.array() -= learning_rate * (m.weight.array() / c1) /
                                ((v.weight.array() / c2).sqrt() + config.epsilon);
        layer.bias.array() -=
            learning_rate * (m.bias.array() / c1) / ((v.bias.array() / c2).sqrt() + config.epsilon);
        break;
      }
    }
  }
  ++params.step_count;
}

Matrix hidden_features(const NetworkParams& params, const Matrix& inputs) {
  if (params.layers.size() < 2) {
    throw ConfigError("network with fewer than 2 layers has no hidden features");
  }
  auto result = forward(params, inputs, Mode::kEvaluation);
  // Penultimate activations are the input to the final layer.
  return std::move(result.cache.layer_inputs.back());
}

std::vector<int> predict(const NetworkParams& params, const Matrix& inputs) {
  const Matrix logits = forward(params, inputs, Mode::kEvaluation).logits;
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace diw
