// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace diw {

/// Per-example importance weights. Before normalization every entry lies in
/// [0, B]; after `normalize_mean` the mean is 1.
struct WeightVector {
  Eigen::VectorXd values;
  bool normalized = false;

  Eigen::Index size() const { return values.size(); }
  double mean() const { return values.size() == 0 ? 0.0 : values.mean(); }

  static WeightVector uniform(Eigen::Index n) {
    return WeightVector{Eigen::VectorXd::Ones(n), true};
  }
};

}  // namespace diw
