// SPDX-License-Identifier: Apache-2.0
#include "diw/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "diw/error.hpp"
#include "diw/rng.hpp"
#include "diw/transforms.hpp"

namespace diw {
namespace {

constexpr std::array<Method, 13> kMethods = {
    Method::kClean, Method::kUniform, Method::kRandom, Method::kTruth, Method::kIw,
    Method::kSiwF,  Method::kSiwL,    Method::kDiw1F,  Method::kDiw1L, Method::kDiw2F,
    Method::kDiw2L, Method::kDiw3F,   Method::kDiw3L,
};

constexpr std::array<std::string_view, 7> kEpochMetricNames = {
    "test_accuracy",
    "train_accuracy_intact",
    "train_accuracy_mislabeled_given",
    "train_accuracy_mislabeled_clean",
    "train_loss",
    "mean_weight_intact",
    "mean_weight_mislabeled",
};

// At most this many individual fallback notes are kept in the run log.
constexpr std::size_t kMaxLoggedNotes = 20;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(rows[r]);
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, std::span<const Eigen::Index> rows) {
  std::vector<int> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = labels[static_cast<std::size_t>(rows[r])];
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, std::span<const Eigen::Index> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Eigen::Index>(r)] = v[rows[r]];
  return out;
}

struct BatchWeights {
  Eigen::VectorXd pre;
  double cap = 1.0;
  bool dynamic = false;
};

// Supplies pre-normalization weights for one training mini-batch.
using WeightProvider = std::function<BatchWeights(const NetworkParams& current,
                                                  std::span<const Eigen::Index> batch, int epoch,
                                                  std::int64_t step)>;

BatchWeights uniform_batch(std::size_t n) {
  return BatchWeights{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), 1.0, false};
}

WeightProvider uniform_provider() {
  return [](const NetworkParams&, std::span<const Eigen::Index> batch, int, std::int64_t) {
    return uniform_batch(batch.size());
  };
}

WeightProvider static_provider(Eigen::VectorXd weights) {
  return [w = std::move(weights)](const NetworkParams&, std::span<const Eigen::Index> batch, int,
                                  std::int64_t) {
    BatchWeights bw;
    bw.pre = gather(w, batch);
    bw.cap = bw.pre.size() > 0 ? bw.pre.maxCoeff() : 1.0;
    return bw;
  };
}

struct LoopState {
  NetworkParams params;
  OptimizerState optimizer;
  Eigen::VectorXd last_weights;
};

class Logger {
 public:
  explicit Logger(std::vector<std::string>* sink) : sink_(sink) {}
  void note(const std::string& line) {
    ++count_;
    if (sink_ != nullptr && count_ <= kMaxLoggedNotes) sink_->push_back(line);
  }
  std::size_t count() const { return count_; }

 private:
  std::vector<std::string>* sink_;
  std::size_t count_ = 0;
};

EpochMetrics measure_epoch(int epoch, const NetworkParams& params, const TrainingData& data,
                           const Eigen::VectorXd& last_weights) {
  EpochMetrics m;
  m.epoch = epoch;
  m.test_accuracy = evaluate(params, data.test, LabelView::kClean);
  m.train_accuracy_intact =
      evaluate_subset(params, data.train, NoiseFlag::kIntact, LabelView::kGiven);
  m.train_accuracy_mislabeled_given =
      evaluate_subset(params, data.train, NoiseFlag::kMislabeled, LabelView::kGiven);
  m.train_accuracy_mislabeled_clean =
      evaluate_subset(params, data.train, NoiseFlag::kMislabeled, LabelView::kClean);
  if (data.train.size() > 0) {
    const Matrix logits = forward(params, data.train.features, Mode::kEvaluation).logits;
    m.train_loss = softmax_cross_entropy(logits, data.train.given_labels).mean();
  } else {
    m.train_loss = kNaN;
  }
  if (last_weights.size() == data.train.size()) {
    const WeightAudit audit = weight_audit(last_weights, data.train);
    m.mean_weight_intact = audit.count_intact > 0 ? audit.mean_intact : kNaN;
    m.mean_weight_mislabeled = audit.count_mislabeled > 0 ? audit.mean_mislabeled : kNaN;
  } else {
    m.mean_weight_intact = kNaN;
    m.mean_weight_mislabeled = kNaN;
  }
  return m;
}

// Trains state.params on `fit_set` for epochs [first_epoch, last_epoch).
// When `metrics` is non-null, per-epoch metrics against `data` are appended.
void train_epochs(const RunConfig& config, std::uint64_t seed, const LabeledDataset& fit_set,
                  const TrainingData& data, LoopState& state, int first_epoch, int last_epoch,
                  const WeightProvider& provider, RunMetrics* metrics, const RunHooks& hooks,
                  Logger& logger) {
  const Eigen::Index n = fit_set.size();
  if (n == 0) throw ConfigError("cannot train on an empty dataset");
  if (state.last_weights.size() != n) state.last_weights = Eigen::VectorXd::Ones(n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const double alpha = config.weight_mixing;
  BatchWeightStats scratch;
  BatchWeightStats& stats = metrics != nullptr ? metrics->batch_stats : scratch;

  for (int epoch = first_epoch; epoch < last_epoch; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Engine shuffler = make_engine(seed, streams::kBatching, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffler);
    const double lr = config.optimizer.learning_rate_at(epoch);

    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const std::span<const Eigen::Index> batch(order.data() + start, stop - start);
      const std::int64_t step = state.params.step_count;

      BatchWeights bw;
      bool fallback = false;
      Eigen::VectorXd weights;
      try {
        bw = provider(state.params, batch, epoch, step);
        if (bw.dynamic && alpha > 0.0) {
          const Eigen::VectorXd fresh = normalize_mean(WeightVector{bw.pre, false}).values;
          const Eigen::VectorXd old = gather(state.last_weights, batch);
          const double fresh_cap = bw.cap * static_cast<double>(bw.pre.size()) / bw.pre.sum();
          bw.pre = alpha * old + (1.0 - alpha) * fresh;
          bw.cap = alpha * old.maxCoeff() + (1.0 - alpha) * fresh_cap;
        }
        weights = normalize_mean(WeightVector{bw.pre, false}).values;
      } catch (const DegenerateWeightsError& e) {
        fallback = true;
        logger.note("epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                    ": degenerate weights (" + e.what() + "), using uniform weights");
      } catch (const DegenerateDataError& e) {
        fallback = true;
        logger.note("epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                    ": degenerate features (" + e.what() + "), using uniform weights");
      }
      if (fallback) {
        bw = uniform_batch(batch.size());
        weights = bw.pre;
        ++stats.fallback_batches;
      }

      check_batch_weights(weights, bw.pre, bw.cap);
      ++stats.batches;
      stats.max_mean_deviation = std::max(stats.max_mean_deviation, std::abs(weights.mean() - 1.0));
      stats.min_weight = stats.batches == 1 ? weights.minCoeff()
                                            : std::min(stats.min_weight, weights.minCoeff());
      const double bound = bw.cap * static_cast<double>(bw.pre.size()) / bw.pre.sum();
      stats.max_bound_ratio = std::max(stats.max_bound_ratio, weights.maxCoeff() / bound);
      for (std::size_t r = 0; r < batch.size(); ++r) {
        state.last_weights[batch[r]] = weights[static_cast<Eigen::Index>(r)];
      }
      if (hooks.on_batch_weights) {
        BatchWeightEvent event{epoch, step, batch, &weights, &bw.pre, bw.cap};
        hooks.on_batch_weights(event);
      }

      const Eigen::MatrixXd x = gather_rows(fit_set.features, batch);
      const std::vector<int> y = gather_labels(fit_set.given_labels, batch);
      const ForwardResult fwd = forward(state.params, x, Mode::kTraining,
                                        derive_seed(seed, streams::kDropout,
                                                    static_cast<std::uint64_t>(step)));
      const Gradients grads = backward_weighted(state.params, fwd.cache, y, weights);
      optimizer_step(state.params, grads, state.optimizer, config.optimizer, lr);
    }

    if (metrics != nullptr) {
      metrics->epochs.push_back(measure_epoch(epoch, state.params, data, state.last_weights));
      if (hooks.on_epoch) hooks.on_epoch(metrics->epochs.back());
    }
  }
}

struct SolveCounter {
  BatchWeightStats* stats;
  Logger* logger;

  void record(const SolveReport& report, const std::string& where) {
    ++stats->solves;
    if (!report.converged) {
      ++stats->nonconverged_solves;
      logger->note(where + ": weight solver stopped after " + std::to_string(report.iterations) +
                   " iterations with KKT residual " + std::to_string(report.kkt_residual) +
                   "; using the last iterate");
    }
  }
};

// Per-mini-batch weight estimation on features from `extractor` (the current
// classifier when null).
WeightProvider dynamic_provider(const RunConfig& config, const TrainingData& data,
                                const LabeledDataset& fit_set, const NetworkParams* extractor,
                                int pretrain_epochs, SolveCounter counter) {
  const bool hidden = uses_hidden_features(config.method);
  const Eigen::Index n_v = data.validation.size();
  const auto m = static_cast<std::size_t>(std::min<Eigen::Index>(n_v, config.validation_batch_size));
  return [&config, &data, &fit_set, extractor, pretrain_epochs, counter, hidden, n_v, m](
             const NetworkParams& current, std::span<const Eigen::Index> batch, int epoch,
             std::int64_t step) mutable -> BatchWeights {
    if (epoch < pretrain_epochs) return uniform_batch(batch.size());
    const NetworkParams& fe = extractor != nullptr ? *extractor : current;

    Engine engine = make_engine(config.seed, streams::kValidation, static_cast<std::uint64_t>(step));
    std::uniform_int_distribution<Eigen::Index> pick(0, n_v - 1);
    std::vector<Eigen::Index> vrows(m);
    for (auto& r : vrows) r = pick(engine);

    const Eigen::MatrixXd x_tr = gather_rows(fit_set.features, batch);
    const std::vector<int> y_tr = gather_labels(fit_set.given_labels, batch);
    const Eigen::MatrixXd x_v = gather_rows(data.validation.features, vrows);
    const std::vector<int> y_v = gather_labels(data.validation.given_labels, vrows);
    const std::string where = "epoch " + std::to_string(epoch) + " step " + std::to_string(step);

    BatchWeights bw;
    bw.dynamic = true;
    if (hidden) {
      const FeatureBlock z_tr = hidden_transform(fe, x_tr);
      const FeatureBlock z_v = hidden_transform(fe, x_v);
      const PriorRatios ratios = estimate_prior_ratios(y_tr, y_v, fit_set.num_classes);
      PerClassKmm est = per_class_kmm(z_tr.features, z_v.features, y_tr, y_v, ratios,
                                      config.kernel, config.solver);
      for (const auto& report : est.reports) counter.record(report, where);
      for (const auto& note : est.notes) counter.logger->note(where + ": " + note);
      bw.pre = std::move(est.pre_normalization);
      bw.cap = est.pre_normalization_cap;
    } else {
      const FeatureBlock z_tr = loss_transform(fe, x_tr, y_tr);
      const FeatureBlock z_v = loss_transform(fe, x_v, y_v);
      KmmEstimate est = kmm_estimate(z_tr.features, z_v.features, config.kernel, config.solver);
      counter.record(est.report, where);
      bw.pre = std::move(est.raw.values);
      bw.cap = config.kernel.box_bound;
    }
    return bw;
  };
}

LoopState fresh_state(const RunConfig& config, const LabeledDataset& reference,
                      std::uint64_t stream_index) {
  LoopState state;
  state.params = make_classifier(config, reference.dim(), reference.num_classes, stream_index);
  return state;
}

// Unweighted pretraining of a separate feature extractor on its own streams.
NetworkParams pretrain_extractor(const RunConfig& config, const TrainingData& data, Logger& logger) {
  LoopState fe = fresh_state(config, data.train, 1);
  const std::uint64_t fe_seed = derive_seed(config.seed, "feature-extractor");
  train_epochs(config, fe_seed, data.train, data, fe, 0, config.resolved_pretrain_epochs(),
               uniform_provider(), nullptr, {}, logger);
  return fe.params;
}

void finish(RunMetrics& metrics, LoopState& state, const TrainingData& data, Logger& logger,
            bool has_weights) {
  if (has_weights) {
    metrics.final_weights = WeightVector{state.last_weights, true};
    metrics.audit = weight_audit(state.last_weights, data.train, data.oracle_weights);
  }
  if (logger.count() > kMaxLoggedNotes) {
    metrics.log.push_back(std::to_string(logger.count() - kMaxLoggedNotes) +
                          " further notes suppressed");
  }
  metrics.final_params = std::move(state.params);
}

void check_data(const TrainingData& data) {
  data.train.validate();
  data.validation.validate();
  data.test.validate();
  if (data.train.size() == 0) throw ConfigError("training set is empty");
  if (data.validation.size() == 0) throw ConfigError("validation set is empty");
  if (data.validation.dim() != data.train.dim() ||
      (data.test.size() > 0 && data.test.dim() != data.train.dim())) {
    throw InputError("train/validation/test feature widths differ");
  }
  if (data.oracle_weights && data.oracle_weights->size() != data.train.size()) {
    throw InputError("oracle weights do not match the training set");
  }
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kClean: return "clean";
    case Method::kUniform: return "uniform";
    case Method::kRandom: return "random";
    case Method::kTruth: return "truth";
    case Method::kIw: return "iw";
    case Method::kSiwF: return "siw-f";
    case Method::kSiwL: return "siw-l";
    case Method::kDiw1F: return "diw1-f";
    case Method::kDiw1L: return "diw1-l";
    case Method::kDiw2F: return "diw2-f";
    case Method::kDiw2L: return "diw2-l";
    case Method::kDiw3F: return "diw3-f";
    case Method::kDiw3L: return "diw3-l";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : kMethods) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

std::span<const Method> all_methods() { return kMethods; }

bool is_diw(Method m) {
  return m == Method::kDiw1F || m == Method::kDiw1L || m == Method::kDiw2F ||
         m == Method::kDiw2L || m == Method::kDiw3F || m == Method::kDiw3L;
}

bool is_siw(Method m) { return m == Method::kSiwF || m == Method::kSiwL; }

bool is_baseline(Method m) { return !is_diw(m) && !is_siw(m); }

bool uses_hidden_features(Method m) {
  return m == Method::kSiwF || m == Method::kDiw1F || m == Method::kDiw2F || m == Method::kDiw3F;
}

int RunConfig::resolved_pretrain_epochs() const {
  if (pretrain_epochs >= 0) return pretrain_epochs;
  switch (method) {
    case Method::kDiw2F:
    case Method::kDiw2L:
      return 1;
    case Method::kDiw1F:
    case Method::kDiw1L:
    case Method::kDiw3F:
    case Method::kDiw3L:
    case Method::kSiwF:
    case Method::kSiwL:
      return 10;
    default:
      return 0;
  }
}

void RunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (validation_batch_size < 1) throw ConfigError("validation_batch_size must be >= 1");
  if (!(weight_mixing >= 0.0 && weight_mixing <= 1.0)) {
    throw ConfigError("weight_mixing must lie in [0, 1]");
  }
  const int pre = resolved_pretrain_epochs();
  const bool needs_pretraining = is_siw(method) || method == Method::kDiw1F ||
                                 method == Method::kDiw1L || method == Method::kDiw3F ||
                                 method == Method::kDiw3L;
  if (needs_pretraining && pre < 1) {
    throw ConfigError(std::string(to_string(method)) + " needs pretrain_epochs >= 1");
  }
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(network.dropout_rate >= 0.0 && network.dropout_rate < 1.0)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  for (int w : network.hidden_widths) {
    if (w < 1) throw ConfigError("hidden widths must be positive");
  }
  if (uses_hidden_features(method) && network.hidden_widths.empty()) {
    throw ConfigError(std::string(to_string(method)) + " needs at least one hidden layer");
  }
  if (!(random_stddev >= 0.0)) throw ConfigError("random_stddev must be >= 0");
  if (solver.max_iterations < 0 || !(solver.tolerance > 0.0)) {
    throw ConfigError("solver tolerance must be > 0 and max_iterations >= 0");
  }
  kernel.validate();
}

std::span<const std::string_view> epoch_metric_names() { return kEpochMetricNames; }

std::vector<double> epoch_metric_values(const EpochMetrics& m) {
  return {m.test_accuracy,
          m.train_accuracy_intact,
          m.train_accuracy_mislabeled_given,
          m.train_accuracy_mislabeled_clean,
          m.train_loss,
          m.mean_weight_intact,
          m.mean_weight_mislabeled};
}

WeightAudit weight_audit(const Eigen::VectorXd& weights, const LabeledDataset& dataset,
                         const std::optional<Eigen::VectorXd>& oracle) {
  if (weights.size() != dataset.size()) throw InputError("weights do not match dataset size");
  WeightAudit audit;
  double s_intact = 0.0, s_mislabeled = 0.0, s_majority = 0.0, s_minority = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (dataset.noise_flags[si] == NoiseFlag::kIntact) {
      s_intact += weights[i];
      ++audit.count_intact;
    } else {
      s_mislabeled += weights[i];
      ++audit.count_mislabeled;
    }
    if (dataset.group_flags[si] == GroupFlag::kMajority) {
      s_majority += weights[i];
      ++audit.count_majority;
    } else if (dataset.group_flags[si] == GroupFlag::kMinority) {
      s_minority += weights[i];
      ++audit.count_minority;
    }
  }
  auto safe_mean = [](double s, Eigen::Index c) { return c > 0 ? s / static_cast<double>(c) : 0.0; };
  audit.mean_intact = safe_mean(s_intact, audit.count_intact);
  audit.mean_mislabeled = safe_mean(s_mislabeled, audit.count_mislabeled);
  audit.mean_majority = safe_mean(s_majority, audit.count_majority);
  audit.mean_minority = safe_mean(s_minority, audit.count_minority);
  if (oracle) {
    if (oracle->size() != weights.size()) throw InputError("oracle does not match weights");
    if (weights.size() > 0) {
      const Eigen::ArrayXd diff = (weights - *oracle).array();
      audit.mae = diff.abs().mean();
      audit.rmse = std::sqrt(diff.square().mean());
    }
  }
  return audit;
}

double separation_auc(const Eigen::VectorXd& weights, const LabeledDataset& dataset) {
  if (weights.size() != dataset.size()) throw InputError("weights do not match dataset size");
  const Eigen::Index n = weights.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return weights[a] < weights[b]; });
  std::vector<double> rank(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && weights[order[j + 1]] == weights[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[static_cast<std::size_t>(order[t])] = mid;
    i = j + 1;
  }
  double rank_sum = 0.0;
  double pos = 0.0;
  double neg = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dataset.noise_flags[static_cast<std::size_t>(i)] == NoiseFlag::kIntact) {
      rank_sum += rank[static_cast<std::size_t>(i)];
      pos += 1.0;
    } else {
      neg += 1.0;
    }
  }
  if (pos == 0.0 || neg == 0.0) return kNaN;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double evaluate(const NetworkParams& params, const LabeledDataset& dataset, LabelView view) {
  if (dataset.size() == 0) return kNaN;
  const std::vector<int> pred = predict(params, dataset.features);
  const auto& labels = view == LabelView::kGiven ? dataset.given_labels : dataset.clean_labels;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double evaluate_subset(const NetworkParams& params, const LabeledDataset& dataset, NoiseFlag flag,
                       LabelView view) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < dataset.noise_flags.size(); ++i) {
    if (dataset.noise_flags[i] == flag) rows.push_back(static_cast<Eigen::Index>(i));
  }
  if (rows.empty()) return kNaN;
  return evaluate(params, dataset.subset(rows), view);
}

void check_batch_weights(const Eigen::VectorXd& weights, const Eigen::VectorXd& pre, double cap) {
  if (weights.size() == 0) return;
  const double mean = weights.mean();
  if (!(std::abs(mean - 1.0) <= 1e-9)) {
    throw NumericError("batch weights have mean " + std::to_string(mean) + ", expected 1");
  }
  if (!(weights.minCoeff() >= 0.0)) throw NumericError("batch weights contain negative entries");
  const double bound = cap * static_cast<double>(pre.size()) / pre.sum();
  if (!(weights.maxCoeff() <= bound * (1.0 + 1e-9))) {
    throw NumericError("batch weight " + std::to_string(weights.maxCoeff()) +
                       " exceeds its bound " + std::to_string(bound));
  }
}

NetworkParams make_classifier(const RunConfig& config, Eigen::Index input_dim, int num_classes,
                              std::uint64_t stream_index) {
  std::vector<int> widths;
  widths.push_back(static_cast<int>(input_dim));
  for (int w : config.network.hidden_widths) widths.push_back(w);
  widths.push_back(num_classes);
  return init_network(widths, derive_seed(config.seed, streams::kInit, stream_index),
                      config.network.dropout_rate, config.network.activation);
}

RunMetrics run_diw(const RunConfig& config, const TrainingData& data, const RunHooks& hooks) {
  if (!is_diw(config.method)) throw ConfigError("run_diw needs a diw method");
  config.validate();
  check_data(data);
  RunMetrics metrics;
  Logger logger(&metrics.log);
  SolveCounter counter{&metrics.batch_stats, &logger};

  const bool separate_extractor =
      config.method == Method::kDiw1F || config.method == Method::kDiw1L;
  std::optional<NetworkParams> extractor;
  int uniform_epochs = config.resolved_pretrain_epochs();
  if (separate_extractor) {
    extractor = pretrain_extractor(config, data, logger);
    uniform_epochs = 0;
  }
  LoopState state = fresh_state(config, data.train, 0);
  const WeightProvider provider =
      dynamic_provider(config, data, data.train, extractor ? &*extractor : nullptr, uniform_epochs,
                       counter);
  train_epochs(config, config.seed, data.train, data, state, 0, config.epochs, provider, &metrics,
               hooks, logger);
  finish(metrics, state, data, logger, true);
  return metrics;
}

RunMetrics run_siw(const RunConfig& config, const TrainingData& data, const RunHooks& hooks) {
  if (!is_siw(config.method)) throw ConfigError("run_siw needs a siw method");
  config.validate();
  check_data(data);
  RunMetrics metrics;
  Logger logger(&metrics.log);
  SolveCounter counter{&metrics.batch_stats, &logger};

  const NetworkParams extractor = pretrain_extractor(config, data, logger);
  Eigen::VectorXd static_weights;
  if (config.method == Method::kSiwF) {
    const FeatureBlock z_tr = hidden_transform(extractor, data.train.features);
    const FeatureBlock z_v = hidden_transform(extractor, data.validation.features);
    const PriorRatios ratios = estimate_prior_ratios(
        data.train.given_labels, data.validation.given_labels, data.train.num_classes);
    PerClassKmm est = per_class_kmm(z_tr.features, z_v.features, data.train.given_labels,
                                    data.validation.given_labels, ratios, config.kernel,
                                    config.solver);
    for (const auto& r : est.reports) counter.record(r, "static weights");
    for (const auto& note : est.notes) logger.note("static weights: " + note);
    static_weights = std::move(est.weights.values);
  } else {
    const FeatureBlock z_tr =
        loss_transform(extractor, data.train.features, data.train.given_labels);
    const FeatureBlock z_v =
        loss_transform(extractor, data.validation.features, data.validation.given_labels);
    KmmEstimate est = kmm_estimate(z_tr.features, z_v.features, config.kernel, config.solver);
    counter.record(est.report, "static weights");
    static_weights = std::move(est.weights.values);
  }

  LoopState state = fresh_state(config, data.train, 0);
  train_epochs(config, config.seed, data.train, data, state, 0, config.epochs,
               static_provider(std::move(static_weights)), &metrics, hooks, logger);
  finish(metrics, state, data, logger, true);
  return metrics;
}

RunMetrics run_baseline(const RunConfig& config, const TrainingData& data, const RunHooks& hooks) {
  if (!is_baseline(config.method)) throw ConfigError("run_baseline needs a baseline method");
  config.validate();
  check_data(data);
  RunMetrics metrics;
  Logger logger(&metrics.log);
  SolveCounter counter{&metrics.batch_stats, &logger};
  const Eigen::Index n = data.train.size();

  if (config.method == Method::kClean) {
    LoopState state = fresh_state(config, data.validation, 0);
    train_epochs(config, config.seed, data.validation, data, state, 0, config.epochs,
                 uniform_provider(), &metrics, hooks, logger);
    finish(metrics, state, data, logger, false);
    return metrics;
  }

  WeightProvider provider;
  switch (config.method) {
    case Method::kUniform:
      provider = uniform_provider();
      break;
    case Method::kRandom: {
      Engine engine = make_engine(config.seed, streams::kRandomBaseline);
      std::normal_distribution<double> normal(config.random_mean, config.random_stddev);
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = std::max(0.0, normal(engine));
      provider = static_provider(normalize_mean(WeightVector{w, false}).values);
      break;
    }
    case Method::kTruth:
      if (!data.oracle_weights) {
        throw ConfigError("truth baseline needs oracle weights (class-prior shift only)");
      }
      provider = static_provider(*data.oracle_weights);
      break;
    case Method::kIw: {
      // Weight estimation on the raw inputs of each class alone; class priors
      // are not corrected for.
      PriorRatios ratios;
      ratios.ratios = Eigen::VectorXd::Ones(data.train.num_classes);
      ratios.missing_in_train.assign(static_cast<std::size_t>(data.train.num_classes), false);
      PerClassKmm est = per_class_kmm(data.train.features, data.validation.features,
                                      data.train.given_labels, data.validation.given_labels,
                                      ratios, config.kernel, config.solver);
      for (const auto& r : est.reports) counter.record(r, "static weights");
      for (const auto& note : est.notes) logger.note("static weights: " + note);
      provider = static_provider(std::move(est.weights.values));
      break;
    }
    default:
      throw InternalError("unhandled baseline");
  }
  LoopState state = fresh_state(config, data.train, 0);
  train_epochs(config, config.seed, data.train, data, state, 0, config.epochs, provider, &metrics,
               hooks, logger);
  finish(metrics, state, data, logger, true);
  return metrics;
}

RunMetrics run(const RunConfig& config, const TrainingData& data, const RunHooks& hooks) {
  if (is_diw(config.method)) return run_diw(config, data, hooks);
  if (is_siw(config.method)) return run_siw(config, data, hooks);
  return run_baseline(config, data, hooks);
}

}  // namespace diw
