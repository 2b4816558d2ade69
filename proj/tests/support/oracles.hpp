// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for the tests. None of these call into
// the library's numeric code: they use plain loops, enumeration and finite
// differences so that agreement with the library means something.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diw/network.hpp"

namespace diw::testing {

/// Random inputs for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin() { return integer(0, 1) == 1; }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols, double sd = 1.0);
  Eigen::VectorXd vector(Eigen::Index n, double lo, double hi);
  /// A A^T + shift * I with A standard normal.
  Eigen::MatrixXd spd(Eigen::Index n, double shift);
  std::vector<int> labels(std::size_t n, int k);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Weighted mean softmax cross-entropy of the network, evaluated with plain
/// loops (no dropout).
double reference_weighted_loss(const NetworkParams& params, const Eigen::MatrixXd& x,
                               const std::vector<int>& labels, const Eigen::VectorXd& weights);

/// Reference logits with plain loops.
Eigen::MatrixXd reference_logits(const NetworkParams& params, const Eigen::MatrixXd& x);

/// Central finite differences of reference_weighted_loss for every parameter,
/// laid out like the library's Gradients.
std::vector<DenseLayer> finite_difference_gradients(const NetworkParams& params,
                                                    const Eigen::MatrixXd& x,
                                                    const std::vector<int>& labels,
                                                    const Eigen::VectorXd& weights,
                                                    double step = 1e-6);

/// max |a - b| / max(1, max |b|) over all layers.
double relative_gradient_error(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b);

/// Best objective w^T K w - 2 k^T w over the grid {0, h, 2h, ..., B}^n
/// (n <= 3). The upper face B is always included.
double grid_search_qp(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& linear, double bound,
                      double step);

/// ||a_i - b_j||^2 by explicit coordinate loops.
Eigen::MatrixXd brute_force_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Nearest-rank quantile: the smallest positive value v such that at least
/// ceil(p * N) of the N positive values are <= v, found by scanning every
/// candidate.
double enumerated_positive_quantile(const Eigen::MatrixXd& values, double p);

/// Quantile of a sample by sorting and interpolating at p * (n - 1).
double sorted_quantile(std::vector<double> values, double p);

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Fresh empty directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace diw::testing
