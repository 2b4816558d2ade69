// SPDX-License-Identifier: Apache-2.0
//
// Experiment engine. Every method trains the same classifier family with
// per-mini-batch mean-one weights on the weighted empirical risk
//
//   (1/n) sum_i w_i * loss(f(x_i), y_i),
//
// and differs only in where the weights come from:
//
//   clean        train on the validation set alone
//   uniform      all ones
//   random       max(0, N(1, 1)) per example, drawn once
//   truth        oracle weights supplied with the data
//   iw           kernel mean matching on raw inputs inside each class, once,
//                without prior-ratio scaling
//   siw-f/-l     a pretrained network gives hidden/loss features; one static
//                kernel-mean-matching solve on the full data
//   diw1-f/-l    a pretrained, frozen network gives features; weights are
//                re-estimated every mini-batch for a separate classifier
//   diw2-f/-l    the classifier being trained gives the features; weights are
//                re-estimated every mini-batch after pretrain_epochs of
//                uniform training (default one epoch)
//   diw3-f/-l    diw2 with a longer uniform warm-up
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "diw/kernels.hpp"
#include "diw/kmm.hpp"
#include "diw/network.hpp"
#include "diw/shifts.hpp"

namespace diw {

enum class Method {
  kClean,
  kUniform,
  kRandom,
  kTruth,
  kIw,
  kSiwF,
  kSiwL,
  kDiw1F,
  kDiw1L,
  kDiw2F,
  kDiw2L,
  kDiw3F,
  kDiw3L,
};

std::string_view to_string(Method method);
/// Throws ConfigError on unknown names.
Method parse_method(std::string_view name);
std::span<const Method> all_methods();

bool is_diw(Method method);
bool is_siw(Method method);
bool is_baseline(Method method);
/// -F variants (hidden-layer features, per-class matching).
bool uses_hidden_features(Method method);

struct NetworkConfig {
  std::vector<int> hidden_widths{32, 32};
  double dropout_rate = 0.0;
  Activation activation = Activation::kRelu;
};

struct RunConfig {
  Method method = Method::kDiw2L;
  NetworkConfig network;
  OptimizerConfig optimizer;
  KernelConfig kernel;
  SolverOptions solver;
  int epochs = 30;
  // < 0 selects the method default: 1 for diw2, 10 for diw1/diw3/siw, 0 otherwise.
  int pretrain_epochs = -1;
  int batch_size = 64;
  int validation_batch_size = 64;
  double weight_mixing = 0.0;  // alpha: new = alpha * old + (1 - alpha) * solved
  double random_mean = 1.0;    // Random baseline: max(0, N(mean, stddev))
  double random_stddev = 1.0;
  std::uint64_t seed = 0;

  int resolved_pretrain_epochs() const;
  /// Throws ConfigError on invalid combinations.
  void validate() const;
};

struct TrainingData {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
  // Per-training-example true weights, when the shift has a known oracle.
  std::optional<Eigen::VectorXd> oracle_weights;
};

struct EpochMetrics {
  int epoch = 0;
  double test_accuracy = 0.0;
  double train_accuracy_intact = 0.0;
  double train_accuracy_mislabeled_given = 0.0;
  double train_accuracy_mislabeled_clean = 0.0;
  double train_loss = 0.0;
  double mean_weight_intact = 0.0;
  double mean_weight_mislabeled = 0.0;
};

/// Metric names in CSV order, matching the EpochMetrics fields.
std::span<const std::string_view> epoch_metric_names();
std::vector<double> epoch_metric_values(const EpochMetrics& m);

struct WeightAudit {
  std::optional<double> mae;
  std::optional<double> rmse;
  double mean_intact = 0.0;
  double mean_mislabeled = 0.0;
  double mean_majority = 0.0;
  double mean_minority = 0.0;
  Eigen::Index count_intact = 0;
  Eigen::Index count_mislabeled = 0;
  Eigen::Index count_majority = 0;
  Eigen::Index count_minority = 0;
};

/// MAE and RMSE against the oracle (when given) and group means over the
/// intact/mislabeled and majority/minority flags. Empty groups report 0.
WeightAudit weight_audit(const Eigen::VectorXd& weights, const LabeledDataset& dataset,
                         const std::optional<Eigen::VectorXd>& oracle = std::nullopt);

/// Rank-sum (Mann-Whitney) AUC of the weights separating intact (positive) from
/// mislabeled examples, midranks for ties. NaN when either group is empty.
double separation_auc(const Eigen::VectorXd& weights, const LabeledDataset& dataset);

enum class LabelView { kGiven, kClean };

/// Argmax accuracy (lowest index on ties). Empty datasets report NaN.
double evaluate(const NetworkParams& params, const LabeledDataset& dataset,
                LabelView view = LabelView::kGiven);

/// Accuracy restricted to rows whose noise flag equals `flag`.
double evaluate_subset(const NetworkParams& params, const LabeledDataset& dataset, NoiseFlag flag,
                       LabelView view);

struct BatchWeightStats {
  std::int64_t batches = 0;
  std::int64_t fallback_batches = 0;
  std::int64_t solves = 0;
  std::int64_t nonconverged_solves = 0;
  double max_mean_deviation = 0.0;
  double min_weight = 0.0;
  // Largest ratio of a normalized entry to its admissible bound (<= 1 when
  // every batch satisfied the bound).
  double max_bound_ratio = 0.0;
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;
  WeightVector final_weights;  // last weight applied to each training example
  std::optional<WeightAudit> audit;
  BatchWeightStats batch_stats;
  std::vector<std::string> log;
  NetworkParams final_params;
};

struct BatchWeightEvent {
  int epoch = 0;
  std::int64_t step = 0;
  std::span<const Eigen::Index> indices;  // rows of the training set in this batch
  const Eigen::VectorXd* weights = nullptr;            // normalized
  const Eigen::VectorXd* pre_normalization = nullptr;  // before normalization
  double cap = 0.0;  // admissible bound on pre-normalization entries
};

struct RunHooks {
  std::function<void(const BatchWeightEvent&)> on_batch_weights;
  std::function<void(const EpochMetrics&)> on_epoch;
};

/// Checks the per-batch weight invariants: mean one within 1e-9, every entry
/// in [0, cap * n / sum(pre)]. Throws NumericError on violation.
void check_batch_weights(const Eigen::VectorXd& weights, const Eigen::VectorXd& pre,
                         double cap);

/// Dynamic importance weighting (diw1/2/3, -f/-l).
RunMetrics run_diw(const RunConfig& config, const TrainingData& data, const RunHooks& hooks = {});
/// Static importance weighting (siw-f/-l).
RunMetrics run_siw(const RunConfig& config, const TrainingData& data, const RunHooks& hooks = {});
/// clean, uniform, random, truth, iw.
RunMetrics run_baseline(const RunConfig& config, const TrainingData& data,
                        const RunHooks& hooks = {});
/// Dispatches on config.method.
RunMetrics run(const RunConfig& config, const TrainingData& data, const RunHooks& hooks = {});

/// Fresh classifier for `data` under `config`; stream index 0 is the trained
/// classifier, 1 the separately pretrained feature extractor.
NetworkParams make_classifier(const RunConfig& config, Eigen::Index input_dim, int num_classes,
                              std::uint64_t stream_index);

}  // namespace diw
