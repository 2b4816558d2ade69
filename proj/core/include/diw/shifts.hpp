// SPDX-License-Identifier: Apache-2.0
//
// Distribution-shift generators and their ground-truth oracles: Gaussian
// covariate/class-prior shift with analytic density ratios, class-conditional
// label noise, and class-prior subsampling with closed-form true weights.
// Class labels are 0-based throughout.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace diw {

enum class NoiseFlag : std::uint8_t { kIntact, kMislabeled };
enum class GroupFlag : std::uint8_t { kNone, kMajority, kMinority };

struct LabeledDataset {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> given_labels;
  std::vector<int> clean_labels;
  std::vector<NoiseFlag> noise_flags;
  std::vector<GroupFlag> group_flags;
  int num_classes = 0;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  /// Fresh dataset with clean labels, every example intact and ungrouped.
  static LabeledDataset from_clean(Eigen::MatrixXd features, std::vector<int> labels,
                                   int num_classes);

  /// Throws InputError unless lengths agree, labels are in range, and given
  /// labels equal clean labels exactly where the example is intact.
  void validate() const;

  LabeledDataset subset(std::span<const Eigen::Index> rows) const;
  /// Rows of `other` appended after this dataset's rows.
  LabeledDataset concat(const LabeledDataset& other) const;

  bool operator==(const LabeledDataset& other) const;
};

struct GaussianComponent {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Per-class Gaussian class-conditionals and class priors for a training
/// domain and a test domain.
struct GaussianShiftSpec {
  std::vector<GaussianComponent> train;  // one per class
  std::vector<GaussianComponent> test;
  Eigen::VectorXd train_priors;
  Eigen::VectorXd test_priors;

  int num_classes() const { return static_cast<int>(train.size()); }
  Eigen::Index dim() const { return train.empty() ? 0 : train.front().mean.size(); }
  /// Throws ConfigError unless shapes agree, priors are distributions and
  /// every covariance is symmetric positive definite.
  void validate() const;

  /// k isotropic classes with means evenly spaced on a circle of `radius` in
  /// the first two coordinates (1-D: evenly spaced on a line), identical in
  /// both domains with uniform priors.
  static GaussianShiftSpec circle(int num_classes, int dim, double radius, double sigma);
};

enum class NoiseKind { kPair, kSymmetric };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kSymmetric;
  double rate = 0.0;
  int num_classes = 2;
};

/// T_ij = P(noisy = j | clean = i). Pair: rate moves to the successor class
/// (i + 1) mod k. Symmetric: rate spread evenly over the other k - 1 classes.
Eigen::MatrixXd noise_matrix(const NoiseSpec& spec);

/// Resamples every given label from the noise-matrix row of its clean label.
/// Each example draws from its own stream, so outcomes are independent of
/// dataset order and size. Features and clean labels are untouched.
LabeledDataset inject_noise(const LabeledDataset& dataset, const NoiseSpec& spec,
                            std::uint64_t seed);

/// round(mu * k), the number of minority classes.
int minority_class_count(double mu, int num_classes);

/// round(per_majority_count / rho).
int minority_class_size(int per_majority_count, double rho);

/// Keeps `per_majority_count` examples of each majority class and
/// round(per_majority_count / rho) of each minority class. An empty
/// `minority_classes` selects the last round(mu * k) classes.
LabeledDataset subsample_class_prior(const LabeledDataset& dataset, double mu, double rho,
                                     std::vector<int> minority_classes, int per_majority_count,
                                     std::uint64_t seed);

struct ClassPriorWeights {
  double majority = 1.0;
  double minority = 1.0;
};

/// Closed-form p_te(y) / p_tr(y) for a balanced test set:
/// majority 1 - mu + mu / rho, minority mu + rho - mu * rho.
ClassPriorWeights true_class_prior_weights(double mu, double rho);

/// Per-example true weights read off the majority/minority flags.
Eigen::VectorXd class_prior_oracle(const LabeledDataset& dataset, double mu, double rho);

struct TaskSplit {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

/// Training examples from the training domain; validation and test from the
/// test domain. With `include_validation` the validation rows are also
/// appended to the end of the training set.
TaskSplit make_gaussian_task(const GaussianShiftSpec& spec, int n_train, int n_validation,
                             int n_test, std::uint64_t seed, bool include_validation = false);

/// p_te(x, y) / p_tr(x, y) for the Gaussian mixture spec. Throws
/// AbsoluteContinuityError if the training density underflows to zero.
double analytic_density_ratio(const GaussianShiftSpec& spec, const Eigen::VectorXd& x, int y);

/// Log density of N(mean, covariance) at x.
double gaussian_log_pdf(const GaussianComponent& component, const Eigen::VectorXd& x);

/// Label-noise task: clean validation/test from the spec's test domain, a
/// training set drawn from its training domain with noise injected. With
/// `include_validation` the clean validation rows are appended to training.
TaskSplit make_label_noise_task(const GaussianShiftSpec& spec, int n_train, int n_validation,
                                int n_test, const NoiseSpec& noise, std::uint64_t seed,
                                bool include_validation = true);

struct ClassPriorTaskSpec {
  double mu = 0.25;
  double rho = 20.0;
  int per_majority_count = 400;
  int validation_per_class = 10;
  int test_per_class = 250;
  std::vector<int> minority_classes;  // empty: the last round(mu * k) classes
};

/// Class-prior-shift task built from a spec whose class-conditionals are
/// shared by both domains. The training set is subsampled to the
/// majority/minority sizes; validation rows are drawn from inside the training
/// set (balanced, `validation_per_class` each) unless `include_validation` is
/// false, in which case they are drawn separately. The test set is balanced.
TaskSplit make_class_prior_task(const GaussianShiftSpec& spec, const ClassPriorTaskSpec& prior,
                                std::uint64_t seed, bool include_validation = true);

}  // namespace diw
