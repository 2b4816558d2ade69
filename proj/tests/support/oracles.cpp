// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <unistd.h>

namespace diw::testing {

Eigen::MatrixXd Gen::matrix(Eigen::Index rows, Eigen::Index cols, double sd) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(0.0, sd);
  }
  return m;
}

Eigen::VectorXd Gen::vector(Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
  return v;
}

Eigen::MatrixXd Gen::spd(Eigen::Index n, double shift) {
  const Eigen::MatrixXd a = matrix(n, n);
  Eigen::MatrixXd s = a * a.transpose();
  for (Eigen::Index i = 0; i < n; ++i) s(i, i) += shift;
  return s;
}

std::vector<int> Gen::labels(std::size_t n, int k) {
  std::vector<int> y(n);
  for (auto& v : y) v = integer(0, k - 1);
  return y;
}

Eigen::MatrixXd reference_logits(const NetworkParams& params, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), params.output_width());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> h(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) h[static_cast<std::size_t>(j)] = x(r, j);
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      const DenseLayer& layer = params.layers[l];
      std::vector<double> next(static_cast<std::size_t>(layer.out_width()));
      for (Eigen::Index o = 0; o < layer.out_width(); ++o) {
        double s = layer.bias[o];
        for (Eigen::Index i = 0; i < layer.in_width(); ++i) {
          s += layer.weight(o, i) * h[static_cast<std::size_t>(i)];
        }
        if (l + 1 < params.layers.size()) {
          s = params.activation == Activation::kRelu ? (s > 0.0 ? s : 0.0) : std::tanh(s);
        }
        next[static_cast<std::size_t>(o)] = s;
      }
      h = std::move(next);
    }
    for (std::size_t c = 0; c < h.size(); ++c) out(r, static_cast<Eigen::Index>(c)) = h[c];
  }
  return out;
}

double reference_weighted_loss(const NetworkParams& params, const Eigen::MatrixXd& x,
                               const std::vector<int>& labels, const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd logits = reference_logits(params, x);
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < logits.cols(); ++c) mx = std::max(mx, logits(r, c));
    double z = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) z += std::exp(logits(r, c) - mx);
    const double loss = mx + std::log(z) - logits(r, labels[static_cast<std::size_t>(r)]);
    total += weights[r] * loss;
  }
  return total / static_cast<double>(logits.rows());
}

std::vector<DenseLayer> finite_difference_gradients(const NetworkParams& params,
                                                    const Eigen::MatrixXd& x,
                                                    const std::vector<int>& labels,
                                                    const Eigen::VectorXd& weights, double step) {
  NetworkParams p = params;
  std::vector<DenseLayer> grads;
  auto probe = [&](double& slot) {
    const double saved = slot;
    slot = saved + step;
    const double up = reference_weighted_loss(p, x, labels, weights);
    slot = saved - step;
    const double down = reference_weighted_loss(p, x, labels, weights);
    slot = saved;
    return (up - down) / (2.0 * step);
  };
  for (auto& layer : p.layers) {
    DenseLayer g{Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()),
                 Eigen::VectorXd::Zero(layer.bias.size())};
    for (Eigen::Index o = 0; o < layer.weight.rows(); ++o) {
      for (Eigen::Index i = 0; i < layer.weight.cols(); ++i) g.weight(o, i) = probe(layer.weight(o, i));
      g.bias[o] = probe(layer.bias[o]);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double relative_gradient_error(const std::vector<DenseLayer>& a, const std::vector<DenseLayer>& b) {
  double diff = 0.0;
  double scale = 1.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    diff = std::max(diff, (a[l].weight - b[l].weight).cwiseAbs().maxCoeff());
    diff = std::max(diff, (a[l].bias - b[l].bias).cwiseAbs().maxCoeff());
    scale = std::max(scale, b[l].weight.cwiseAbs().maxCoeff());
    scale = std::max(scale, b[l].bias.cwiseAbs().maxCoeff());
  }
  return diff / scale;
}

double grid_search_qp(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& linear, double bound,
                      double step) {
  const Eigen::Index n = linear.size();
  const auto ticks = static_cast<long>(std::floor(bound / step + 1e-9));
  std::vector<double> grid;
  for (long t = 0; t <= ticks; ++t) grid.push_back(static_cast<double>(t) * step);
  if (grid.back() < bound) grid.push_back(bound);

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd w(n);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) w[i] = grid[idx[static_cast<std::size_t>(i)]];
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) obj += w[i] * kernel(i, j) * w[j];
      obj -= 2.0 * linear[i] * w[i];
    }
    best = std::min(best, obj);
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] == grid.size()) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return best;
}

Eigen::MatrixXd brute_force_sq_dists(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double diff = a(i, c) - b(j, c);
        s += diff * diff;
      }
      d(i, j) = s;
    }
  }
  return d;
}

double enumerated_positive_quantile(const Eigen::MatrixXd& values, double p) {
  std::vector<double> pos;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values.data()[i] > 0.0) pos.push_back(values.data()[i]);
  }
  const auto need = static_cast<std::size_t>(std::ceil(p * static_cast<double>(pos.size())));
  double best = std::numeric_limits<double>::infinity();
  for (double candidate : pos) {
    std::size_t at_most = 0;
    for (double v : pos) at_most += v <= candidate ? 1 : 0;
    if (at_most >= std::max<std::size_t>(need, 1)) best = std::min(best, candidate);
  }
  return best;
}

double sorted_quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (pos - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("diw-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace diw::testing
