// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace diw {

/// How the RBF scale gamma is obtained.
enum class BandwidthRule {
  kInverseQuantile,  // gamma = 1 / q, q the requested quantile of squared distances
  kQuantile,         // gamma = q (literal reading, exposed for comparison)
  kFixed,            // gamma taken from KernelConfig::gamma as given
};

/// Kernel and weight-bound hyperparameters for kernel mean matching.
struct KernelConfig {
  double gamma = 1.0;  // resolved RBF scale; overwritten unless rule == kFixed
  double gamma_quantile = 0.01;
  BandwidthRule bandwidth_rule = BandwidthRule::kInverseQuantile;
  double ridge = 1e-5;      // omega, added to the kernel diagonal
  double box_bound = 10.0;  // B
  double slack = 0.0;       // epsilon; only used by project_slack_band
  bool project_slack = false;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Inputs at most this wide use exact per-pair differences; wider inputs use
/// the Gram expansion.
inline constexpr Eigen::Index kDirectDistanceMaxWidth = 64;

/// Kernel values below this are stored as exact zeros.
inline constexpr double kKernelFloor = 1e-200;

/// exp(-gamma * sq_dists) entrywise, with values below kKernelFloor set to 0.
Eigen::MatrixXd rbf_values(const Eigen::MatrixXd& sq_dists, double gamma);

/// Entry (i, j) = ||a_i - b_j||^2.
Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Nearest-rank quantile of the strictly positive entries of `values`:
/// sorted[ceil(p * N) - 1]. Throws DegenerateDataError when there is none.
double positive_quantile(const Eigen::MatrixXd& values, double quantile);

/// gamma = 1 / positive_quantile(sq_dists, quantile).
double resolve_bandwidth(const Eigen::MatrixXd& sq_dists, double quantile);

/// Returns `cfg` with gamma resolved from the training squared distances
/// according to its bandwidth rule.
KernelConfig resolve_kernel(const KernelConfig& cfg, const Eigen::MatrixXd& train_sq_dists);

/// K_ij = exp(-gamma ||z_i - z_j||^2) + ridge * [i == j].
Eigen::MatrixXd rbf_kernel_matrix(const Eigen::MatrixXd& z, const KernelConfig& cfg);

/// Same as rbf_kernel_matrix but reuses precomputed squared distances.
Eigen::MatrixXd rbf_kernel_from_sq_dists(const Eigen::MatrixXd& sq_dists, const KernelConfig& cfg);

/// k_i = (n_tr / n_v) * sum_j exp(-gamma ||z_i^tr - z_j^v||^2).
Eigen::VectorXd cross_kernel_vector(const Eigen::MatrixXd& z_train,
                                    const Eigen::MatrixXd& z_validation, const KernelConfig& cfg);

}  // namespace diw
