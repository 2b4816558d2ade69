// SPDX-License-Identifier: Apache-2.0
//
// Feature maps fed to weight estimation. Both are computed with the network
// in evaluation mode and its parameters held fixed, so calling a transform
// twice on the same snapshot gives identical features.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diw/kmm.hpp"
#include "diw/network.hpp"

namespace diw {

enum class FeatureSource { kLossValue, kHiddenLayer, kRawInput };

struct FeatureBlock {
  Eigen::MatrixXd features;  // n x d_r
  FeatureSource source = FeatureSource::kLossValue;
  std::int64_t produced_at_step = 0;
};

/// Per-example loss l(f(x), y) as a one-column block.
FeatureBlock loss_transform(const NetworkParams& params, const Eigen::MatrixXd& inputs,
                            std::span<const int> labels);

/// Penultimate-layer activations.
FeatureBlock hidden_transform(const NetworkParams& params, const Eigen::MatrixXd& inputs);

struct ClassPartition {
  int num_classes = 0;
  std::vector<std::vector<Eigen::Index>> train;
  std::vector<std::vector<Eigen::Index>> validation;
};

ClassPartition partition_by_class(std::span<const int> train_labels,
                                  std::span<const int> validation_labels, int num_classes);

struct PriorRatios {
  Eigen::VectorXd ratios;          // p_te(y) / p_tr(y); +inf where the class is absent from training
  std::vector<bool> missing_in_train;  // class absent from training but present in validation
};

/// Ratios by counting: (count_v(y) / n_v) / (count_tr(y) / n_tr).
PriorRatios estimate_prior_ratios(std::span<const int> train_labels,
                                  std::span<const int> validation_labels, int num_classes);

struct PerClassKmm {
  WeightVector weights;  // batch-normalized
  Eigen::VectorXd pre_normalization;
  // Largest value any pre-normalization entry could take.
  double pre_normalization_cap = 0.0;
  std::vector<SolveReport> reports;
  std::vector<std::string> notes;  // fallbacks taken, one line each
};

/// Runs kernel mean matching separately inside each class, scales class y's
/// solution by its prior ratio, concatenates, and normalizes the whole batch to
/// mean one. A class with training rows but no validation rows, or whose
/// features admit no bandwidth, gets uniform weights times its ratio.
PerClassKmm per_class_kmm(const Eigen::MatrixXd& train_features,
                          const Eigen::MatrixXd& validation_features,
                          std::span<const int> train_labels,
                          std::span<const int> validation_labels, const PriorRatios& ratios,
                          const KernelConfig& cfg, const SolverOptions& options = {});

}  // namespace diw
