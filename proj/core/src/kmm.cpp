// SPDX-License-Identifier: Apache-2.0
#include "diw/kmm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "diw/error.hpp"

namespace diw {
namespace {

double residual_from_gradient(const Eigen::VectorXd& w, const Eigen::VectorXd& grad, double bound) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double v;
    if (w[i] <= 0.0) {
      v = -grad[i];
    } else if (w[i] >= bound) {
      v = grad[i];
    } else {
      v = std::abs(grad[i]);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

void QpProblem::validate() const {
  const Eigen::Index n = linear.size();
  if (kernel.rows() != n || kernel.cols() != n) {
    throw InputError("QP kernel is " + std::to_string(kernel.rows()) + "x" +
                     std::to_string(kernel.cols()) + " but linear term has " + std::to_string(n) +
                     " entries");
  }
  if (!kernel.allFinite() || !linear.allFinite()) throw InputError("QP data contain nonfinite entries");
  // The solver only reads the lower triangle.
  if (n > 0 && (kernel - kernel.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + kernel.cwiseAbs().maxCoeff())) {
    throw InputError("QP kernel is not symmetric");
  }
  if (!(box_bound > 0.0) || !std::isfinite(box_bound)) throw ConfigError("box bound must be > 0");
}

double qp_objective(const QpProblem& problem, const Eigen::VectorXd& w) {
  if (w.size() != problem.size()) throw InputError("weight length does not match QP size");
  return w.dot(problem.kernel * w) - 2.0 * problem.linear.dot(w);
}

double kkt_residual(const QpProblem& problem, const Eigen::VectorXd& w) {
  if (w.size() != problem.size()) throw InputError("weight length does not match QP size");
  const Eigen::VectorXd grad = 2.0 * (problem.kernel * w - problem.linear);
  return residual_from_gradient(w, grad, problem.box_bound);
}

BoxQpSolution solve_box_qp(const QpProblem& problem, const SolverOptions& options) {
  problem.validate();
  const Eigen::Index n = problem.size();
  const double bound = problem.box_bound;
  BoxQpSolution out;
  out.weights.values = Eigen::VectorXd::Constant(n, std::min(1.0, bound));
  if (n == 0) {
    out.report.converged = true;
    return out;
  }

  const double row_sum_bound = problem.kernel.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(row_sum_bound > 0.0)) throw NumericError("QP kernel is identically zero");
  const double step = 1.0 / (2.0 * row_sum_bound);

  Eigen::VectorXd& w = out.weights.values;
  Eigen::VectorXd kw = problem.kernel * w;
  double objective = w.dot(kw) - 2.0 * problem.linear.dot(w);
  Eigen::VectorXd grad(n);
  Eigen::VectorXd next(n);
  SolveReport& report = out.report;

  int iter = 0;
  for (;; ++iter) {
    grad = 2.0 * (kw - problem.linear);
    report.kkt_residual = residual_from_gradient(w, grad, bound);
    if (report.kkt_residual <= options.tolerance) {
      report.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;
    next = (w - step * grad).cwiseMax(0.0).cwiseMin(bound);
    Eigen::VectorXd next_kw = problem.kernel.selfadjointView<Eigen::Lower>() * next;
    const double next_objective = next.dot(next_kw) - 2.0 * problem.linear.dot(next);
    if (next_objective > objective + 1e-12 * (1.0 + std::abs(objective))) report.monotone = false;
    if (!std::isfinite(next_objective)) throw NumericError("QP objective became nonfinite");
    w.swap(next);
    kw.swap(next_kw);
    objective = next_objective;
  }
  report.iterations = iter;
  report.objective = objective;
  return out;
}

WeightVector normalize_mean(const WeightVector& w) {
  const Eigen::Index n = w.size();
  if (n == 0) throw DegenerateWeightsError("cannot normalize an empty weight vector");
  if (!w.values.allFinite() || w.values.minCoeff() < 0.0) {
    throw DegenerateWeightsError("weights must be finite and nonnegative");
  }
  const double total = w.values.sum();
  if (!(total > 0.0)) throw DegenerateWeightsError("weights sum to zero");
  WeightVector out{w.values * (static_cast<double>(n) / total), true};
  return out;
}

WeightVector project_slack_band(const WeightVector& w, double slack, double box_bound) {
  WeightVector out = w;
  const double m = w.mean();
  if (m <= 0.0) return out;
  double target = m;
  if (m > 1.0 + slack) target = 1.0 + slack;
  if (m < 1.0 - slack) target = std::max(0.0, 1.0 - slack);
  if (target == m) return out;
  out.values = (w.values * (target / m)).cwiseMin(box_bound);
  out.normalized = false;
  return out;
}

QpProblem build_kmm_problem(const Eigen::MatrixXd& z_train, const Eigen::MatrixXd& z_validation,
                            const KernelConfig& resolved) {
  QpProblem problem;
  problem.kernel = rbf_kernel_matrix(z_train, resolved);
  problem.linear = cross_kernel_vector(z_train, z_validation, resolved);
  problem.box_bound = resolved.box_bound;
  return problem;
}

KmmEstimate kmm_estimate(const Eigen::MatrixXd& z_train, const Eigen::MatrixXd& z_validation,
                         const KernelConfig& cfg, const SolverOptions& options) {
  cfg.validate();
  if (z_train.rows() == 0) throw InputError("training block is empty");
  if (z_validation.rows() == 0) throw InputError("validation block is empty");
  if (z_train.cols() != z_validation.cols()) {
    throw InputError("training and validation features differ in width");
  }
  if (!z_train.allFinite() || !z_validation.allFinite()) {
    throw InputError("kernel features contain nonfinite entries");
  }
  const Eigen::MatrixXd sq = pairwise_sq_dists(z_train, z_train);
  const KernelConfig resolved = resolve_kernel(cfg, sq);

  QpProblem problem;
  problem.kernel = rbf_kernel_from_sq_dists(sq, resolved);
  problem.linear = cross_kernel_vector(z_train, z_validation, resolved);
  problem.box_bound = resolved.box_bound;

  BoxQpSolution solution = solve_box_qp(problem, options);
  KmmEstimate est;
  est.raw = solution.weights;
  if (cfg.project_slack) est.raw = project_slack_band(est.raw, cfg.slack, cfg.box_bound);
  est.report = solution.report;
  est.gamma = resolved.gamma;
  est.weights = normalize_mean(est.raw);
  return est;
}

}  // namespace diw
