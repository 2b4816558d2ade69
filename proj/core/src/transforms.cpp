// SPDX-License-Identifier: Apache-2.0
#include "diw/transforms.hpp"

#include <limits>

#include "diw/error.hpp"

namespace diw {
namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

void check_label_range(std::span<const int> labels, int k, const char* what) {
  for (int y : labels) {
    if (y < 0 || y >= k) {
      throw InputError(std::string(what) + " label " + std::to_string(y) + " outside [0, " +
                       std::to_string(k) + ")");
    }
  }
}

}  // namespace

FeatureBlock loss_transform(const NetworkParams& params, const Eigen::MatrixXd& inputs,
                            std::span<const int> labels) {
  const Matrix logits = forward(params, inputs, Mode::kEvaluation).logits;
  FeatureBlock block;
  block.features = softmax_cross_entropy(logits, labels);
  block.source = FeatureSource::kLossValue;
  block.produced_at_step = params.step_count;
  return block;
}

FeatureBlock hidden_transform(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  FeatureBlock block;
  block.features = hidden_features(params, inputs);
  block.source = FeatureSource::kHiddenLayer;
  block.produced_at_step = params.step_count;
  return block;
}

ClassPartition partition_by_class(std::span<const int> train_labels,
                                  std::span<const int> validation_labels, int num_classes) {
  if (num_classes < 1) throw InputError("partition needs at least one class");
  check_label_range(train_labels, num_classes, "training");
  check_label_range(validation_labels, num_classes, "validation");
  ClassPartition p;
  p.num_classes = num_classes;
  p.train.resize(static_cast<std::size_t>(num_classes));
  p.validation.resize(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < train_labels.size(); ++i) {
    p.train[static_cast<std::size_t>(train_labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < validation_labels.size(); ++i) {
    p.validation[static_cast<std::size_t>(validation_labels[i])].push_back(
        static_cast<Eigen::Index>(i));
  }
  return p;
}

PriorRatios estimate_prior_ratios(std::span<const int> train_labels,
                                  std::span<const int> validation_labels, int num_classes) {
  if (train_labels.empty() || validation_labels.empty()) {
    throw InputError("prior ratios need nonempty training and validation labels");
  }
  const ClassPartition p = partition_by_class(train_labels, validation_labels, num_classes);
  const double n_tr = static_cast<double>(train_labels.size());
  const double n_v = static_cast<double>(validation_labels.size());
  PriorRatios out;
  out.ratios.resize(num_classes);
  out.missing_in_train.assign(static_cast<std::size_t>(num_classes), false);
  for (int c = 0; c < num_classes; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const double count_tr = static_cast<double>(p.train[cc].size());
    const double count_v = static_cast<double>(p.validation[cc].size());
    if (count_tr == 0.0) {
      out.ratios[c] = count_v > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      out.missing_in_train[cc] = count_v > 0.0;
      continue;
    }
    out.ratios[c] = (count_v / n_v) / (count_tr / n_tr);
  }
  return out;
}

PerClassKmm per_class_kmm(const Eigen::MatrixXd& train_features,
                          const Eigen::MatrixXd& validation_features,
                          std::span<const int> train_labels,
                          std::span<const int> validation_labels, const PriorRatios& ratios,
                          const KernelConfig& cfg, const SolverOptions& options) {
  const int k = static_cast<int>(ratios.ratios.size());
  if (static_cast<Eigen::Index>(train_labels.size()) != train_features.rows() ||
      static_cast<Eigen::Index>(validation_labels.size()) != validation_features.rows()) {
    throw InputError("label counts do not match feature rows");
  }
  const ClassPartition p = partition_by_class(train_labels, validation_labels, k);

  PerClassKmm out;
  out.pre_normalization = Eigen::VectorXd::Zero(train_features.rows());
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    const auto& tr_rows = p.train[cc];
    if (tr_rows.empty()) continue;
    const double ratio = ratios.ratios[c];
    Eigen::VectorXd class_weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(tr_rows.size()));
    double cap = 1.0;
    if (p.validation[cc].empty()) {
      out.notes.push_back("class " + std::to_string(c) +
                          ": no validation rows, uniform weights scaled by the prior ratio");
    } else {
      try {
        const KmmEstimate est = kmm_estimate(gather_rows(train_features, tr_rows),
                                             gather_rows(validation_features, p.validation[cc]),
                                             cfg, options);
        class_weights = est.weights.values;
        cap = cfg.box_bound * static_cast<double>(tr_rows.size()) / est.raw.values.sum();
        out.reports.push_back(est.report);
      } catch (const DegenerateDataError& e) {
        out.notes.push_back("class " + std::to_string(c) + ": " + e.what() +
                            "; uniform weights scaled by the prior ratio");
      }
    }
    out.pre_normalization_cap = std::max(out.pre_normalization_cap, cap * ratio);
    for (std::size_t r = 0; r < tr_rows.size(); ++r) {
      out.pre_normalization[tr_rows[r]] = ratio * class_weights[static_cast<Eigen::Index>(r)];
    }
  }
  out.weights = normalize_mean(WeightVector{out.pre_normalization, false});
  return out;
}

}  // namespace diw
