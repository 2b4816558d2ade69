// SPDX-License-Identifier: Apache-2.0
#include "diw/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "diw/error.hpp"

namespace diw {
namespace {

void check_gamma(const KernelConfig& cfg) {
  if (!(std::isfinite(cfg.gamma) && cfg.gamma > 0.0)) {
    throw ConfigError("kernel gamma must be finite and positive, got " + std::to_string(cfg.gamma));
  }
}

void check_finite(const Eigen::MatrixXd& z, const char* what) {
  if (!z.allFinite()) throw InputError(std::string(what) + " contain nonfinite entries");
}

}  // namespace

void KernelConfig::validate() const {
  if (!(gamma_quantile > 0.0 && gamma_quantile <= 1.0)) {
    throw ConfigError("gamma_quantile must lie in (0, 1]");
  }
  if (bandwidth_rule == BandwidthRule::kFixed) check_gamma(*this);
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("ridge must be >= 0");
  if (!(box_bound > 0.0) || !std::isfinite(box_bound)) throw ConfigError("box_bound must be > 0");
  if (!(slack >= 0.0)) throw ConfigError("slack must be >= 0");
}

Eigen::MatrixXd pairwise_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw InputError("pairwise distances need equal widths, got " + std::to_string(a.cols()) +
                     " and " + std::to_string(b.cols()));
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  const Eigen::Index width = a.cols();
  Eigen::MatrixXd d(n, m);
  if (width <= kDirectDistanceMaxWidth) {
    // Exact differences: identical rows give exactly zero.
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < width; ++c) {
          const double diff = a(i, c) - b(j, c);
          s += diff * diff;
        }
        d(i, j) = s;
      }
    }
    return d;
  }
  // Gram expansion for wide inputs; entries lost to cancellation are zeroed.
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  d.noalias() = -2.0 * (a * b.transpose());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = d(i, j) + an[i] + bn[j];
      d(i, j) = v <= 1e-12 * (an[i] + bn[j]) ? 0.0 : v;
    }
  }
  return d;
}

double positive_quantile(const Eigen::MatrixXd& values, double quantile) {
  if (!(quantile > 0.0 && quantile <= 1.0)) throw ConfigError("quantile must lie in (0, 1]");
  std::vector<double> positive;
  positive.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double v = values.data()[i];
    if (v > 0.0 && std::isfinite(v)) positive.push_back(v);
  }
  if (positive.empty()) {
    throw DegenerateDataError("no strictly positive squared distance; cannot derive a bandwidth");
  }
  const auto count = positive.size();
  auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(count)));
  rank = std::clamp<std::size_t>(rank, 1, count);
  auto nth = positive.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(positive.begin(), nth, positive.end());
  return *nth;
}

double resolve_bandwidth(const Eigen::MatrixXd& sq_dists, double quantile) {
  return 1.0 / positive_quantile(sq_dists, quantile);
}

KernelConfig resolve_kernel(const KernelConfig& cfg, const Eigen::MatrixXd& train_sq_dists) {
  KernelConfig out = cfg;
  switch (cfg.bandwidth_rule) {
    case BandwidthRule::kInverseQuantile:
      out.gamma = resolve_bandwidth(train_sq_dists, cfg.gamma_quantile);
      break;
    case BandwidthRule::kQuantile:
      out.gamma = positive_quantile(train_sq_dists, cfg.gamma_quantile);
      break;
    case BandwidthRule::kFixed:
      break;
  }
  check_gamma(out);
  return out;
}

Eigen::MatrixXd rbf_values(const Eigen::MatrixXd& sq_dists, double gamma) {
  // Subnormal results would make every later matrix product crawl.
  return (-gamma * sq_dists.array())
      .exp()
      .unaryExpr([](double v) { return v < kKernelFloor ? 0.0 : v; })
      .matrix();
}

Eigen::MatrixXd rbf_kernel_from_sq_dists(const Eigen::MatrixXd& sq_dists,
                                         const KernelConfig& cfg) {
  check_gamma(cfg);
  Eigen::MatrixXd k = rbf_values(sq_dists, cfg.gamma);
  k.diagonal().array() += cfg.ridge;
  return k;
}

Eigen::MatrixXd rbf_kernel_matrix(const Eigen::MatrixXd& z, const KernelConfig& cfg) {
  check_finite(z, "kernel features");
  return rbf_kernel_from_sq_dists(pairwise_sq_dists(z, z), cfg);
}

Eigen::VectorXd cross_kernel_vector(const Eigen::MatrixXd& z_train,
                                    const Eigen::MatrixXd& z_validation,
                                    const KernelConfig& cfg) {
  check_gamma(cfg);
  if (z_validation.rows() == 0) throw InputError("validation block is empty");
  check_finite(z_train, "training features");
  check_finite(z_validation, "validation features");
  const Eigen::MatrixXd cross = pairwise_sq_dists(z_train, z_validation);
  const double scale =
      static_cast<double>(z_train.rows()) / static_cast<double>(z_validation.rows());
  return scale * rbf_values(cross, cfg.gamma).rowwise().sum();
}

}  // namespace diw
