// SPDX-License-Identifier: Apache-2.0
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "diw/kmm.hpp"
#include "diw/network.hpp"

namespace {

Eigen::MatrixXd cloud(Eigen::Index rows, Eigen::Index cols, double shift, unsigned seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(shift, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(engine);
  return m;
}

// One weight estimate as done per mini-batch: 1-D loss features.
void BM_KmmBatch(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Eigen::MatrixXd tr = cloud(n, 1, 0.0, 1);
  const Eigen::MatrixXd v = cloud(n, 1, 0.5, 2);
  diw::KernelConfig cfg;
  cfg.gamma_quantile = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(diw::kmm_estimate(tr, v, cfg));
}
BENCHMARK(BM_KmmBatch)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const std::vector<int> widths = {784, 256, 256, 10};
  const diw::NetworkParams net = diw::init_network(widths, 3, 0.2);
  const Eigen::MatrixXd x = cloud(n, 784, 0.0, 4);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 10);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  std::uint64_t step = 0;
  for (auto _ : state) {
    const diw::ForwardResult fwd = diw::forward(net, x, diw::Mode::kTraining, ++step);
    benchmark::DoNotOptimize(diw::backward_weighted(net, fwd.cache, y, w));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
