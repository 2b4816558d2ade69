// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "diw/error.hpp"
#include "diw/kmm.hpp"
#include "oracles.hpp"

namespace diw {
namespace {

using testing::Gen;

QpProblem random_problem(Gen& gen, Eigen::Index n, double bound) {
  QpProblem p;
  p.kernel = gen.spd(n, 0.1);
  p.linear = gen.vector(n, -1.0, 4.0);
  p.box_bound = bound;
  return p;
}

TEST(BoxQp, ScalarMatchesClippedClosedForm) {
  for (const auto& [a, b, bound] : std::vector<std::tuple<double, double, double>>{
           {2.0, 3.0, 10.0}, {2.0, 30.0, 10.0}, {1.0, -1.0, 10.0}, {0.5, 0.2, 1.0}}) {
    QpProblem p;
    p.kernel = Eigen::MatrixXd::Constant(1, 1, a);
    p.linear = Eigen::VectorXd::Constant(1, b);
    p.box_bound = bound;
    const auto sol = solve_box_qp(p);
    EXPECT_TRUE(sol.report.converged);
    EXPECT_NEAR(sol.weights.values[0], std::clamp(b / a, 0.0, bound), 1e-6);
  }
}

TEST(BoxQp, ZeroLinearTermGivesZeroWeights) {
  Gen gen(11);
  QpProblem p;
  p.kernel = gen.spd(5, 0.5);
  p.linear = Eigen::VectorXd::Zero(5);
  p.box_bound = 10.0;
  const auto sol = solve_box_qp(p);
  EXPECT_TRUE(sol.report.converged);
  EXPECT_LT(sol.weights.values.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(BoxQp, AgreesWithGridSearch) {
  Gen gen(12);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen.integer(1, 3));
    const double bound = gen.coin() ? 1.0 : 10.0;
    const QpProblem p = random_problem(gen, n, bound);
    const auto sol = solve_box_qp(p);
    const double grid = testing::grid_search_qp(p.kernel, p.linear, bound, n == 3 ? 0.05 : 0.01);
    EXPECT_LE(sol.report.objective, grid + 1e-4) << trial;
  }
}

TEST(BoxQp, SolutionsStayInBoxAndSatisfyKkt) {
  Gen gen(13);
  for (int trial = 0; trial < 30; ++trial) {
    const QpProblem p = random_problem(gen, gen.integer(2, 20), 5.0);
    const auto sol = solve_box_qp(p);
    EXPECT_GE(sol.weights.values.minCoeff(), 0.0);
    EXPECT_LE(sol.weights.values.maxCoeff(), 5.0);
    EXPECT_TRUE(sol.report.monotone);
    if (sol.report.converged) {
      EXPECT_LE(kkt_residual(p, sol.weights.values), 1e-5);
    }
    EXPECT_NEAR(sol.report.objective, qp_objective(p, sol.weights.values), 1e-9);
  }
}

TEST(BoxQp, IterationCapReportsNonConvergence) {
  Gen gen(14);
  const QpProblem p = random_problem(gen, 10, 10.0);
  SolverOptions opt;
  opt.max_iterations = 1;
  opt.tolerance = 0.0;
  const auto sol = solve_box_qp(p, opt);
  EXPECT_FALSE(sol.report.converged);
  EXPECT_LE(sol.report.iterations, 1);
}

TEST(BoxQp, ShapeMismatchIsInputError) {
  QpProblem p;
  p.kernel = Eigen::MatrixXd::Identity(2, 2);
  p.linear = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(solve_box_qp(p), InputError);
  EXPECT_THROW(qp_objective(p, Eigen::VectorXd::Ones(2)), InputError);
}

TEST(Normalize, MeanOneAndProportional) {
  WeightVector w{Eigen::Vector4d(0.0, 1.0, 2.0, 5.0), false};
  const WeightVector n = normalize_mean(w);
  EXPECT_TRUE(n.normalized);
  EXPECT_NEAR(n.mean(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(n.values[3] / n.values[1], 5.0);
  EXPECT_EQ(n.values[0], 0.0);
}

TEST(Normalize, DegenerateInputsThrow) {
  EXPECT_THROW(normalize_mean(WeightVector{Eigen::VectorXd::Zero(3), false}),
               DegenerateWeightsError);
  EXPECT_THROW(normalize_mean(WeightVector{Eigen::Vector2d(1.0, -1.0), false}),
               DegenerateWeightsError);
}

TEST(SlackBand, LeavesInBandUntouchedAndPullsOthersIn) {
  WeightVector in{Eigen::Vector2d(1.0, 1.05), false};
  EXPECT_EQ(project_slack_band(in, 0.1, 10.0).values, in.values);
  WeightVector out{Eigen::Vector2d(2.0, 4.0), false};
  const WeightVector p = project_slack_band(out, 0.1, 10.0);
  EXPECT_LE(std::abs(p.mean() - 1.0), 0.1 + 1e-12);
  EXPECT_LE(p.values.maxCoeff(), 10.0);
}

TEST(Kmm, IdenticalSamplesGiveNearUniformWeights) {
  Gen gen(15);
  const Eigen::MatrixXd z = gen.matrix(30, 2);
  KernelConfig cfg;
  cfg.gamma_quantile = 0.5;
  const KmmEstimate est = kmm_estimate(z, z, cfg);
  EXPECT_NEAR(est.weights.mean(), 1.0, 1e-12);
  EXPECT_LT((est.weights.values.array() - 1.0).abs().maxCoeff(), 0.05);
}

TEST(Kmm, UpweightsTrainingRowsNearValidationMass) {
  Eigen::MatrixXd tr(40, 1);
  for (int i = 0; i < 40; ++i) tr(i, 0) = i < 20 ? -2.0 + 0.01 * i : 2.0 + 0.01 * i;
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(10, 1, 2.1);
  KernelConfig cfg;
  cfg.gamma_quantile = 0.5;
  const KmmEstimate est = kmm_estimate(tr, v, cfg);
  EXPECT_GT(est.weights.values.tail(20).mean(), 10.0 * est.weights.values.head(20).mean());
}

TEST(Kmm, PermutingTrainingRowsPermutesWeights) {
  Gen gen(16);
  const Eigen::MatrixXd tr = gen.matrix(12, 2);
  const Eigen::MatrixXd v = gen.matrix(6, 2, 0.5);
  std::vector<Eigen::Index> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  Eigen::MatrixXd tr_p(12, 2);
  for (Eigen::Index i = 0; i < 12; ++i) tr_p.row(i) = tr.row(perm[static_cast<std::size_t>(i)]);
  KernelConfig cfg;
  const KmmEstimate a = kmm_estimate(tr, v, cfg);
  const KmmEstimate b = kmm_estimate(tr_p, v, cfg);
  for (Eigen::Index i = 0; i < 12; ++i) {
    EXPECT_NEAR(b.weights.values[i], a.weights.values[perm[static_cast<std::size_t>(i)]], 1e-6);
  }
}

TEST(Kmm, EmptyBlocksAreInputErrors) {
  KernelConfig cfg;
  EXPECT_THROW(kmm_estimate(Eigen::MatrixXd(0, 1), Eigen::MatrixXd::Ones(2, 1), cfg), InputError);
  EXPECT_THROW(kmm_estimate(Eigen::MatrixXd::Ones(2, 1), Eigen::MatrixXd(0, 1), cfg), InputError);
}

}  // namespace
}  // namespace diw
