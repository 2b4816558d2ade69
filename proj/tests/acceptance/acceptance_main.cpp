// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Runs every criterion at its stated tolerance, prints one
// PASS/FAIL line per criterion on stdout (details go to stderr) and exits
// non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diw/error.hpp"
#include "diw/io/commands.hpp"
#include "diw/io/csv.hpp"
#include "diw/kmm.hpp"
#include "diw/network.hpp"
#include "diw/shifts.hpp"
#include "diw/trainer.hpp"
#include "oracles.hpp"

namespace {

using namespace diw;
using diw::testing::Gen;
using Clock = std::chrono::steady_clock;

constexpr int kSeeds = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- independent QP references ------------------------------------------

double objective_loops(const Eigen::MatrixXd& k, const Eigen::VectorXd& lin, const Eigen::VectorXd& w) {
  double obj = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    for (Eigen::Index j = 0; j < w.size(); ++j) obj += w[i] * k(i, j) * w[j];
    obj -= 2.0 * lin[i] * w[i];
  }
  return obj;
}

// Largest violation of the box KKT conditions, by explicit loops.
double kkt_loops(const Eigen::MatrixXd& k, const Eigen::VectorXd& lin, const Eigen::VectorXd& w,
                 double bound) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    double g = -2.0 * lin[i];
    for (Eigen::Index j = 0; j < w.size(); ++j) g += 2.0 * k(i, j) * w[j];
    double v = 0.0;
    if (w[i] <= 0.0) {
      v = std::max(0.0, -g);
    } else if (w[i] >= bound) {
      v = std::max(0.0, g);
    } else {
      v = std::abs(g);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

// Best objective over the grid {0, h, ..., B}^n for n <= 3. The last
// coordinate enters as a 1-D convex quadratic, so its grid minimum sits at
// one of the two grid points bracketing the clipped stationary point; the
// other coordinates are enumerated (padded to two with a single zero point).
double grid_best(const Eigen::MatrixXd& k, const Eigen::VectorXd& lin, double bound, double h) {
  const Eigen::Index n = lin.size();
  const long ticks = std::lround(bound / h);
  Eigen::Matrix3d kp = Eigen::Matrix3d::Zero();
  Eigen::Vector3d lp = Eigen::Vector3d::Zero();
  kp.bottomRightCorner(n, n) = k;
  lp.tail(n) = lin;
  const long t0 = n >= 3 ? ticks : 0;
  const long t1 = n >= 2 ? ticks : 0;
  const double a = kp(2, 2);
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= t0; ++i) {
    const double x0 = static_cast<double>(i) * h;
    const double base0 = kp(0, 0) * x0 * x0 - 2.0 * lp[0] * x0;
    const double c0 = kp(2, 0) * x0 - lp[2];
    for (long j = 0; j <= t1; ++j) {
      const double x1 = static_cast<double>(j) * h;
      const double base = base0 + 2.0 * kp(0, 1) * x0 * x1 + kp(1, 1) * x1 * x1 - 2.0 * lp[1] * x1;
      const double c = c0 + kp(2, 1) * x1;
      const double star = std::clamp(-c / a, 0.0, bound);
      const long lo = std::min(static_cast<long>(star / h), ticks);
      const double xa = static_cast<double>(lo) * h;
      const double xb = static_cast<double>(std::min(lo + 1, ticks)) * h;
      best = std::min(best, base + std::min(a * xa * xa + 2.0 * c * xa, a * xb * xb + 2.0 * c * xb));
    }
  }
  return best;
}

// Exact optimum by enumerating every face of the box: each coordinate is at
// 0, at B, or free with the free block solving its stationarity equations.
double exact_best(const Eigen::MatrixXd& k, const Eigen::VectorXd& lin, double bound) {
  const Eigen::Index n = lin.size();
  int faces = 1;
  for (Eigen::Index i = 0; i < n; ++i) faces *= 3;
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < faces; ++code) {
    std::vector<int> state(static_cast<std::size_t>(n));
    std::vector<Eigen::Index> free;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0, c = code; i < n; ++i, c /= 3) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      if (c % 3 == 1) w[i] = bound;
      if (c % 3 == 2) free.push_back(i);
    }
    if (!free.empty()) {
      const auto f = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd kff(f, f);
      Eigen::VectorXd rhs(f);
      for (Eigen::Index a = 0; a < f; ++a) {
        rhs[a] = lin[free[static_cast<std::size_t>(a)]];
        for (Eigen::Index j = 0; j < n; ++j) {
          if (state[static_cast<std::size_t>(j)] == 1) rhs[a] -= k(free[static_cast<std::size_t>(a)], j) * bound;
        }
        for (Eigen::Index b = 0; b < f; ++b) {
          kff(a, b) = k(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
        }
      }
      const Eigen::VectorXd sol = kff.ldlt().solve(rhs);
      bool inside = true;
      for (Eigen::Index a = 0; a < f; ++a) {
        inside = inside && sol[a] >= 0.0 && sol[a] <= bound;
        w[free[static_cast<std::size_t>(a)]] = sol[a];
      }
      if (!inside) continue;
    }
    best = std::min(best, objective_loops(k, lin, w));
  }
  return best;
}

QpProblem random_qp(Gen& gen, Eigen::Index n, double bound) {
  QpProblem p;
  p.box_bound = bound;
  if (gen.coin()) {
    // Kernel-mean-matching shaped: RBF Gram matrix plus ridge, scaled cross
    // kernel against a random validation cloud.
    const Eigen::MatrixXd z = gen.matrix(n, 2);
    const Eigen::MatrixXd v = gen.matrix(gen.integer(1, 6), 2, 1.5);
    KernelConfig cfg;
    cfg.bandwidth_rule = BandwidthRule::kFixed;
    cfg.gamma = gen.uniform(0.1, 3.0);
    p.kernel = rbf_kernel_matrix(z, cfg);
    p.linear = cross_kernel_vector(z, v, cfg);
  } else {
    p.kernel = gen.spd(n, 0.1);
    p.linear = gen.vector(n, -1.0, 4.0 * p.kernel.diagonal().mean());
  }
  return p;
}

// ---- criteria ------------------------------------------------------------

struct SolveLog {
  long converged = 0;
  long total = 0;
  double worst_kkt = 0.0;
  void add(const QpProblem& p, const BoxQpSolution& s) {
    ++total;
    if (!s.report.converged) return;
    ++converged;
    worst_kkt = std::max(worst_kkt, kkt_loops(p.kernel, p.linear, s.weights.values, p.box_bound));
  }
};

Outcome criterion_qp_oracle(SolveLog& solves) {
  const auto t0 = Clock::now();
  Gen gen(2024);
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_exact_gap = -std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen.integer(1, 3));
    const double bound = gen.coin() ? 1.0 : 10.0;
    const QpProblem p = random_qp(gen, n, bound);
    const BoxQpSolution s = solve_box_qp(p);
    solves.add(p, s);
    const double obj = objective_loops(p.kernel, p.linear, s.weights.values);
    const double grid = grid_best(p.kernel, p.linear, bound, 1e-3);
    const double exact = exact_best(p.kernel, p.linear, bound);
    worst_gap = std::max(worst_gap, obj - grid);
    worst_exact_gap = std::max(worst_exact_gap, obj - exact);
    if (!(obj <= grid + 1e-4)) {
      ++failures;
      std::fprintf(stderr, "  qp trial %d n=%ld B=%g solver %.9g grid %.9g\n", trial,
                   static_cast<long>(n), bound, obj, grid);
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "200 problems, max(solver - grid) = " << worst_gap
    << ", max(solver - exact face enumeration) = " << worst_exact_gap << ", " << failures
    << " over tolerance, " << secs << " s";
  return {failures == 0 && secs < 60.0, d.str()};
}

Outcome criterion_kkt(SolveLog& solves) {
  const auto t0 = Clock::now();
  // Larger kernel-mean-matching problems on top of the small ones above.
  Gen gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<Eigen::Index>(gen.integer(5, 60));
    const Eigen::MatrixXd z = gen.matrix(n, gen.integer(1, 3));
    const Eigen::MatrixXd v = gen.matrix(gen.integer(5, 30), z.cols(), gen.uniform(0.5, 1.5));
    KernelConfig cfg;
    cfg.gamma_quantile = gen.uniform(0.05, 0.95);
    cfg.box_bound = gen.coin() ? 10.0 : 100.0;
    const KernelConfig resolved = resolve_kernel(cfg, pairwise_sq_dists(z, z));
    const QpProblem p = build_kmm_problem(z, v, resolved);
    solves.add(p, solve_box_qp(p));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << solves.converged << " of " << solves.total << " solves converged, worst KKT violation "
    << solves.worst_kkt << " (limit 1e-5), " << secs << " s";
  return {solves.converged > 0 && solves.worst_kkt <= 1e-5, d.str()};
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  Gen gen(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> widths = {gen.integer(1, 4)};
    const int hidden = gen.integer(1, 2);
    for (int h = 0; h < hidden; ++h) widths.push_back(gen.integer(2, 6));
    widths.push_back(gen.integer(2, 4));
    const Activation act = gen.coin() ? Activation::kRelu : Activation::kTanh;
    NetworkParams net = init_network(widths, static_cast<std::uint64_t>(trial), 0.0, act);
    for (auto& layer : net.layers) layer.bias = gen.vector(layer.bias.size(), -0.5, 0.5);
    const int rows = gen.integer(1, 6);
    const Eigen::MatrixXd x = gen.matrix(rows, widths.front());
    const std::vector<int> y = gen.labels(static_cast<std::size_t>(rows), widths.back());
    const Eigen::VectorXd w = gen.vector(rows, 0.0, 3.0);
    const ForwardResult fwd = forward(net, x, Mode::kEvaluation);
    const Gradients analytic = backward_weighted(net, fwd.cache, y, w);
    const auto numeric = diw::testing::finite_difference_gradients(net, x, y, w);
    worst = std::max(worst, diw::testing::relative_gradient_error(analytic, numeric));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "50 nets, worst relative error " << worst << " (limit 1e-4), " << secs << " s";
  return {worst < 1e-4 && secs < 60.0, d.str()};
}

Outcome criterion_covariate_ratio() {
  const auto t0 = Clock::now();
  GaussianShiftSpec spec;
  spec.train = {{Eigen::VectorXd::Constant(1, 0.0), Eigen::MatrixXd::Constant(1, 1, 1.0)}};
  spec.test = {{Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.64)}};
  spec.train_priors = Eigen::VectorXd::Ones(1);
  spec.test_priors = Eigen::VectorXd::Ones(1);
  KernelConfig cfg;
  cfg.gamma_quantile = 0.5;  // median heuristic
  int passed = 0;
  std::ostringstream d;
  d << "pearson per seed:";
  for (int seed = 0; seed < kSeeds; ++seed) {
    const TaskSplit s = make_gaussian_task(spec, 2000, 500, 0, static_cast<std::uint64_t>(seed));
    const KmmEstimate est = kmm_estimate(s.train.features, s.validation.features, cfg);
    Eigen::VectorXd truth(s.train.size());
    for (Eigen::Index i = 0; i < s.train.size(); ++i) {
      // Closed-form ratio of the two 1-D normal densities.
      const double x = s.train.features(i, 0);
      truth[i] = std::exp(-0.5 * (x - 0.5) * (x - 0.5) / 0.64 + 0.5 * x * x) / 0.8;
    }
    const double r = diw::testing::pearson(est.weights.values, truth);
    passed += r > 0.9;
    d << ' ' << r;
  }
  const double secs = seconds_since(t0);
  d << "; " << passed << "/5 above 0.9, " << secs << " s";
  return {passed == kSeeds && secs < 120.0, d.str()};
}

// Checks every batch weight set against the normalization invariant.
struct InvariantMonitor {
  long batches = 0;
  long violations = 0;
  double worst_mean_dev = 0.0;
  double worst_bound_ratio = 0.0;
  RunHooks hooks() {
    RunHooks h;
    h.on_batch_weights = [this](const BatchWeightEvent& e) {
      ++batches;
      const Eigen::VectorXd& w = *e.weights;
      const Eigen::VectorXd& pre = *e.pre_normalization;
      double sum = 0.0;
      double pre_sum = 0.0;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        sum += w[i];
        pre_sum += pre[i];
      }
      const double n = static_cast<double>(w.size());
      const double dev = std::abs(sum / n - 1.0);
      worst_mean_dev = std::max(worst_mean_dev, dev);
      const double upper = e.cap * n / pre_sum;
      // The bound is reached with equality by the largest entry, so allow the
      // few ulps that separate pre * (n / sum) from cap * n / sum.
      bool ok = dev <= 1e-9;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        worst_bound_ratio = std::max(worst_bound_ratio, w[i] / upper);
        ok = ok && w[i] >= 0.0 && w[i] <= upper * (1.0 + 1e-12);
      }
      violations += ok ? 0 : 1;
    };
    return h;
  }
};

TrainingData class_prior_data(int seed) {
  io::TaskConfig task;
  task.shift = io::ShiftKind::kClassPrior;
  const io::GeneratedTask g = io::generate_task(task, static_cast<std::uint64_t>(seed));
  return {g.split.train, g.split.validation, g.split.test, g.oracle_weights};
}

RunConfig class_prior_run(Method m, int seed) {
  RunConfig c;
  c.method = m;
  c.seed = static_cast<std::uint64_t>(seed);
  c.epochs = 30;
  c.batch_size = 256;
  c.validation_batch_size = 100;
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.learning_rate = 0.01;
  c.kernel.gamma_quantile = 0.99;
  c.kernel.box_bound = 100.0;
  return c;
}

Outcome criterion_class_prior(InvariantMonitor& monitor) {
  const auto t0 = Clock::now();
  int votes = 0;
  std::ostringstream d;
  d << "MAE diw2-l/iw per seed:";
  for (int seed = 0; seed < kSeeds; ++seed) {
    const TrainingData data = class_prior_data(seed);
    const RunMetrics iw = run(class_prior_run(Method::kIw, seed), data, monitor.hooks());
    const RunMetrics diw = run(class_prior_run(Method::kDiw2L, seed), data, monitor.hooks());
    const double a = *diw.audit->mae;
    const double b = *iw.audit->mae;
    votes += a < 0.6 * b;
    d << ' ' << a << '/' << b;
  }
  const double secs = seconds_since(t0);
  d << "; " << votes << "/5 below 0.6x, " << secs << " s";
  return {votes >= 3 && secs < 600.0, d.str()};
}

Outcome criterion_true_weights() {
  const ClassPriorWeights a = true_class_prior_weights(0.2, 100.0);
  const ClassPriorWeights b = true_class_prior_weights(0.2, 200.0);
  const bool ok = std::abs(a.majority - 0.802) <= 1e-12 && std::abs(a.minority - 80.2) <= 1e-12 &&
                  std::abs(b.majority - 0.801) <= 1e-12 && std::abs(b.minority - 160.2) <= 1e-12;
  char buf[200];
  std::snprintf(buf, sizeof buf, "(0.2,100) -> (%.17g, %.17g); (0.2,200) -> (%.17g, %.17g)",
                a.majority, a.minority, b.majority, b.minority);
  return {ok, buf};
}

struct NoiseRuns {
  std::vector<RunMetrics> diw, uniform, siw;
  std::vector<TrainingData> data;
  double seconds = 0.0;
};

RunConfig noise_run(Method m, int seed) {
  RunConfig c;
  c.method = m;
  c.seed = static_cast<std::uint64_t>(seed);
  c.epochs = 30;
  c.batch_size = 8;
  c.network.hidden_widths = {32, 32};
  c.optimizer.kind = OptimizerKind::kAdam;
  c.optimizer.learning_rate = 0.01;
  c.kernel.bandwidth_rule = BandwidthRule::kQuantile;
  c.kernel.gamma_quantile = 0.01;
  return c;
}

NoiseRuns run_noise_experiments(InvariantMonitor& monitor) {
  const auto t0 = Clock::now();
  NoiseRuns out;
  for (int seed = 0; seed < kSeeds; ++seed) {
    io::TaskConfig task;
    task.sigma = 0.6;
    task.n_train = 100;
    task.n_validation = 20;
    task.n_test = 2000;
    task.noise = {NoiseKind::kSymmetric, 0.4, 4};
    const io::GeneratedTask g = io::generate_task(task, static_cast<std::uint64_t>(seed));
    out.data.push_back({g.split.train, g.split.validation, g.split.test, std::nullopt});
    out.diw.push_back(run(noise_run(Method::kDiw2L, seed), out.data.back(), monitor.hooks()));
    out.uniform.push_back(run(noise_run(Method::kUniform, seed), out.data.back(), monitor.hooks()));
    out.siw.push_back(run(noise_run(Method::kSiwL, seed), out.data.back(), monitor.hooks()));
  }
  out.seconds = seconds_since(t0);
  return out;
}

Outcome criterion_separation(const NoiseRuns& r) {
  int passed = 0;
  std::ostringstream d;
  d << "ratio/auc per seed:";
  for (int s = 0; s < kSeeds; ++s) {
    const WeightAudit& a = *r.diw[static_cast<std::size_t>(s)].audit;
    const double ratio = a.mean_intact / a.mean_mislabeled;
    const double auc = separation_auc(r.diw[static_cast<std::size_t>(s)].final_weights.values,
                                      r.data[static_cast<std::size_t>(s)].train);
    passed += ratio >= 2.0 && auc >= 0.8;
    d << ' ' << ratio << '/' << auc;
  }
  d << "; " << passed << "/5 pass, " << r.seconds << " s for all noisy-task runs";
  return {passed >= 4 && r.seconds < 600.0, d.str()};
}

Outcome criterion_accuracy(const NoiseRuns& r) {
  auto mean_acc = [](const std::vector<RunMetrics>& runs) {
    double s = 0.0;
    for (const auto& m : runs) s += m.epochs.back().test_accuracy;
    return 100.0 * s / static_cast<double>(runs.size());
  };
  const double diw = mean_acc(r.diw);
  const double uni = mean_acc(r.uniform);
  const double siw = mean_acc(r.siw);
  std::ostringstream d;
  d << "mean test accuracy diw2-l " << diw << ", uniform " << uni << ", siw-l " << siw;
  return {diw >= uni + 5.0 && diw >= siw - 1.0 && r.seconds < 1200.0, d.str()};
}

Outcome criterion_denoising(const NoiseRuns& r) {
  int passed = 0;
  std::ostringstream d;
  d << "mislabeled-subset accuracy clean/given per seed:";
  for (const auto& m : r.diw) {
    const EpochMetrics& e = m.epochs.back();
    passed += e.train_accuracy_mislabeled_clean > e.train_accuracy_mislabeled_given;
    d << ' ' << e.train_accuracy_mislabeled_clean << '/' << e.train_accuracy_mislabeled_given;
  }
  d << "; " << passed << "/5 pass";
  return {passed >= 4, d.str()};
}

Outcome criterion_determinism() {
  const auto t0 = Clock::now();
  diw::testing::TempDir dir("acceptance");
  struct Case {
    std::string method;
    std::string shift;
  };
  const std::vector<Case> cases = {
      {"uniform", "label_noise"}, {"random", "label_noise"}, {"iw", "label_noise"},
      {"siw-f", "label_noise"},   {"diw1-l", "label_noise"}, {"diw2-f", "label_noise"},
      {"diw2-l", "label_noise"},  {"diw3-l", "label_noise"}, {"truth", "class_prior"},
      {"clean", "class_prior"},
  };
  int identical = 0;
  std::ostringstream d;
  for (const Case& c : cases) {
    const auto root = dir.path() / (c.method + "-" + c.shift);
    const auto cfg_path = dir.path() / (c.method + "-" + c.shift + ".json");
    const std::string prior = c.shift == "class_prior"
                                  ? R"(, "class_prior": {"per_majority_count": 60, "validation_per_class": 3, "test_per_class": 20})"
                                  : "";
    io::write_file_atomic(
        cfg_path, R"({"seed": 9, "output_dir": ")" + root.string() + R"(", "task": {"shift": ")" +
                      c.shift + R"(", "n_train": 80, "n_validation": 16, "n_test": 40)" + prior +
                      R"(}, "train": {"method": ")" + c.method +
                      R"(", "epochs": 3, "pretrain_epochs": 1, "batch_size": 16, "network": {"hidden_widths": [16], "dropout_rate": 0.2}}})");
    io::CommandOptions opt;
    opt.config_path = cfg_path;
    std::ostringstream log;
    io::cmd_generate(opt, log);
    const auto run_dir = io::cmd_train(opt, log);
    const std::string first = io::read_file(run_dir / "metrics.csv");
    opt.force = true;
    io::cmd_train(opt, log);
    const bool same = io::read_file(run_dir / "metrics.csv") == first;
    identical += same;
    if (!same) d << c.method << " differs; ";
  }
  d << identical << "/" << cases.size() << " reruns byte-identical, " << seconds_since(t0) << " s";
  return {identical == static_cast<int>(cases.size()), d.str()};
}

Outcome criterion_invariant(const InvariantMonitor& m) {
  std::ostringstream d;
  d << m.batches << " batch weight sets checked during the class-prior and noisy-task runs, "
    << m.violations << " violations, worst |mean - 1| = " << m.worst_mean_dev
    << ", largest relative excess over the bound " << std::max(0.0, m.worst_bound_ratio - 1.0);
  return {m.batches > 0 && m.violations == 0, d.str()};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s criterion %d: %s | %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  SolveLog solves;
  InvariantMonitor monitor;
  NoiseRuns noise;
  bool noise_ok = true;
  std::string noise_error;

  report(1, "QP oracle equivalence", [&] { return criterion_qp_oracle(solves); });
  report(2, "KKT residuals", [&] { return criterion_kkt(solves); });
  report(3, "gradient fidelity", criterion_gradients);
  report(4, "covariate-shift ratio recovery", criterion_covariate_ratio);
  report(5, "class-prior weight error", [&] { return criterion_class_prior(monitor); });
  report(6, "true-weight formulas", criterion_true_weights);
  try {
    noise = run_noise_experiments(monitor);
  } catch (const std::exception& e) {
    noise_ok = false;
    noise_error = std::string("noisy-task runs threw: ") + e.what();
  }
  auto with_noise = [&](Outcome (*f)(const NoiseRuns&)) {
    return [&, f] { return noise_ok ? f(noise) : Outcome{false, noise_error}; };
  };
  report(7, "label-noise weight separation", with_noise(criterion_separation));
  report(8, "accuracy ordering", with_noise(criterion_accuracy));
  report(9, "denoising on mislabeled subset", with_noise(criterion_denoising));
  report(10, "rerun determinism", criterion_determinism);
  report(11, "batch normalization invariant", [&] { return criterion_invariant(monitor); });

  std::printf("%s: %d of 11 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
