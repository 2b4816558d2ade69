// SPDX-License-Identifier: Apache-2.0
//
// Kernel mean matching. The finite-sample squared MMD between the weighted
// training sample and the validation sample is, up to a constant,
//
//   w^T K w - 2 k^T w,   0 <= w_i <= B,
//
// with K the (ridge-stabilized) training kernel matrix and k the scaled
// cross-kernel vector. The box-constrained QP is solved by projected gradient
// and the solution is then rescaled to mean one.
#pragma once

#include <Eigen/Core>

#include "diw/kernels.hpp"
#include "diw/weights.hpp"

namespace diw {

struct QpProblem {
  Eigen::MatrixXd kernel;  // K, ridge included
  Eigen::VectorXd linear;  // k
  double box_bound = 10.0;

  Eigen::Index size() const { return linear.size(); }
  /// Shape, symmetry, finiteness and bound checks (no eigen-decomposition).
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-6;
  int max_iterations = 20000;
};

struct SolveReport {
  int iterations = 0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool converged = false;
  // False if any iteration increased the objective beyond round-off.
  bool monotone = true;
};

struct BoxQpSolution {
  WeightVector weights;  // unnormalized, inside the box
  SolveReport report;
};

/// w^T K w - 2 k^T w.
double qp_objective(const QpProblem& problem, const Eigen::VectorXd& w);

/// Largest violation of the box KKT conditions at `w`, using the gradient
/// g = 2(Kw - k): -g_i at the lower face, g_i at the upper face, |g_i|
/// in the interior (negative parts clipped to zero).
double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& w);

/// Projected gradient with constant step 1/L, L = 2 * max row sum |K|, started
/// from all-ones clipped to the box. Stops when the KKT residual is at most
/// `options.tolerance` or after `options.max_iterations` steps; in the
/// latter case the report says converged == false and the last (best) iterate
/// is returned.
BoxQpSolution solve_box_qp(const QpProblem& problem, const SolverOptions& options = {});

/// Rescales so the mean is one. Throws DegenerateWeightsError when the weights
/// sum to zero (or are nonfinite/negative).
WeightVector normalize_mean(const WeightVector& w);

/// Rescales unnormalized weights so that |mean(w) - 1| <= slack, then clips to
/// the box. Leaves weights already inside the band untouched.
WeightVector project_slack_band(const WeightVector& w, double slack, double box_bound);

/// Assembles the QP for training features `z_train` against validation
/// features `z_validation` using an already-resolved kernel config.
QpProblem build_kmm_problem(const Eigen::MatrixXd& z_train, const Eigen::MatrixXd& z_validation,
                            const KernelConfig& resolved);

struct KmmEstimate {
  WeightVector weights;  // normalized to mean one
  WeightVector raw;      // solver output inside [0, B]
  SolveReport report;
  double gamma = 0.0;
};

/// Distances -> bandwidth -> K, k -> solve -> normalize.
KmmEstimate kmm_estimate(const Eigen::MatrixXd& z_train, const Eigen::MatrixXd& z_validation,
                         const KernelConfig& cfg, const SolverOptions& options = {});

}  // namespace diw
