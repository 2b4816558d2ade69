// SPDX-License-Identifier: Apache-2.0
#include "diw/io/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include <nlohmann/json.hpp>

#include "diw/error.hpp"
#include "diw/io/csv.hpp"
#include "diw/io/dataset_io.hpp"
#include "diw/io/idx.hpp"
#include "diw/io/report.hpp"
#include "diw/rng.hpp"

namespace diw::io {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSplitNames[] = {"train", "validation", "test"};

void refuse_existing(const fs::path& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec) && !fs::is_empty(dir, ec) && !force) {
    throw PathError(dir.string() + " already exists; pass --force to overwrite");
  }
}

GeneratedTask idx_task(const TaskConfig& task, std::uint64_t seed) {
  const LabeledDataset full_train =
      load_idx(task.idx.train_images, task.idx.train_labels, task.idx.num_classes);
  LabeledDataset test = load_idx(task.idx.test_images, task.idx.test_labels, task.idx.num_classes);
  if (full_train.dim() != test.dim()) throw InputError("IDX train and test image sizes differ");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(full_train.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Engine engine = make_engine(seed, streams::kSubsample, 0);
  std::shuffle(order.begin(), order.end(), engine);
  const auto n_v = std::min<std::size_t>(order.size(), static_cast<std::size_t>(task.n_validation));
  std::size_t n_tr = order.size() - n_v;
  if (task.idx.max_train > 0) n_tr = std::min<std::size_t>(n_tr, task.idx.max_train);
  const std::vector<Eigen::Index> v_rows(order.begin(), order.begin() + static_cast<long>(n_v));
  std::vector<Eigen::Index> tr_rows(order.begin() + static_cast<long>(n_v),
                                    order.begin() + static_cast<long>(n_v + n_tr));
  std::sort(tr_rows.begin(), tr_rows.end());

  GeneratedTask out;
  out.split.validation = full_train.subset(v_rows);
  out.split.train = full_train.subset(tr_rows);
  if (task.idx.max_test > 0 && test.size() > task.idx.max_test) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(task.idx.max_test));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    test = test.subset(rows);
  }
  out.split.test = std::move(test);

  switch (task.shift) {
    case ShiftKind::kNone:
      break;
    case ShiftKind::kLabelNoise:
      out.split.train = inject_noise(out.split.train, task.noise, seed);
      break;
    case ShiftKind::kClassPrior:
      out.split.train = subsample_class_prior(
          out.split.train, task.class_prior.mu, task.class_prior.rho,
          task.class_prior.minority_classes, task.class_prior.per_majority_count, seed);
      break;
    case ShiftKind::kCovariate:
      throw ConfigError("covariate shift is only available for the gaussian source");
  }
  if (task.include_validation) out.split.train = out.split.train.concat(out.split.validation);
  if (task.shift == ShiftKind::kClassPrior) {
    out.oracle_weights = class_prior_oracle(out.split.train, task.class_prior.mu,
                                            task.class_prior.rho);
  }
  return out;
}

json oracle_json(const TaskConfig& task) {
  switch (task.shift) {
    case ShiftKind::kClassPrior: {
      const ClassPriorWeights w = true_class_prior_weights(task.class_prior.mu, task.class_prior.rho);
      return json{{"kind", "class_prior"},
                  {"mu", task.class_prior.mu},
                  {"rho", task.class_prior.rho},
                  {"w_majority", w.majority},
                  {"w_minority", w.minority}};
    }
    case ShiftKind::kLabelNoise: {
      const Eigen::MatrixXd t = noise_matrix(task.noise);
      std::vector<std::vector<double>> rows;
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        rows.emplace_back();
        for (Eigen::Index j = 0; j < t.cols(); ++j) rows.back().push_back(t(i, j));
      }
      return json{{"kind", "label_noise"}, {"noise_matrix", rows}};
    }
    case ShiftKind::kCovariate:
      return json{{"kind", "covariate"}, {"analytic_density_ratio", true}};
    case ShiftKind::kNone:
      break;
  }
  return json{{"kind", "none"}};
}

std::optional<Eigen::VectorXd> oracle_from_manifest(const fs::path& manifest_path,
                                                    const LabeledDataset& train) {
  if (!fs::exists(manifest_path)) return std::nullopt;
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
  const auto it = manifest.find("oracle");
  if (it == manifest.end() || it->value("kind", "") != "class_prior") return std::nullopt;
  return class_prior_oracle(train, it->at("mu").get<double>(), it->at("rho").get<double>());
}

}  // namespace

ConfigFile load_command_config(const CommandOptions& options) {
  if (options.config_path.empty()) throw ConfigError("--config is required");
  ConfigFile cfg = load_config(options.config_path);
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.train.seed = *options.seed;
  }
  return cfg;
}

fs::path output_root(const ConfigFile& config) {
  if (const char* env = std::getenv("DIW_OUT"); env != nullptr && *env != '\0') return fs::path(env);
  return fs::path(config.output_dir);
}

GeneratedTask generate_task(const TaskConfig& task, std::uint64_t seed) {
  task.validate();
  if (task.source == TaskSource::kIdx) return idx_task(task, seed);
  const GaussianShiftSpec spec = task.gaussian_spec();
  GeneratedTask out;
  switch (task.shift) {
    case ShiftKind::kNone:
    case ShiftKind::kCovariate:
      out.split = make_gaussian_task(spec, task.n_train, task.n_validation, task.n_test, seed,
                                     task.include_validation);
      break;
    case ShiftKind::kLabelNoise:
      out.split = make_label_noise_task(spec, task.n_train, task.n_validation, task.n_test,
                                        task.noise, seed, task.include_validation);
      break;
    case ShiftKind::kClassPrior:
      out.split = make_class_prior_task(spec, task.class_prior, seed, task.include_validation);
      out.oracle_weights =
          class_prior_oracle(out.split.train, task.class_prior.mu, task.class_prior.rho);
      break;
  }
  return out;
}

std::string manifest_json(const ConfigFile& config, const GeneratedTask& task) {
  const json resolved = json::parse(to_json_text(config));
  json doc{{"seed", config.seed},
           {"task", resolved.at("task")},
           {"oracle", oracle_json(config.task)},
           {"rows",
            {{"train", task.split.train.size()},
             {"validation", task.split.validation.size()},
             {"test", task.split.test.size()}}}};
  return doc.dump(2) + "\n";
}

std::string metrics_to_csv(const std::string& run_id, std::uint64_t seed,
                           const RunMetrics& metrics) {
  CsvTable table;
  table.header = {"run_id", "seed", "epoch", "metric", "value"};
  const auto names = epoch_metric_names();
  for (const auto& m : metrics.epochs) {
    const std::vector<double> values = epoch_metric_values(m);
    for (std::size_t k = 0; k < names.size(); ++k) {
      table.rows.push_back({run_id, std::to_string(seed), std::to_string(m.epoch),
                            std::string(names[k]), format_double(values[k])});
    }
  }
  return to_csv(table);
}

std::string weights_to_csv(const WeightVector& weights, const LabeledDataset& train) {
  CsvTable table;
  table.header = {"index", "weight", "intact", "group"};
  if (weights.size() > 0 && weights.size() != train.size()) {
    throw InternalError("final weights do not match the training set");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    const char* group = train.group_flags[si] == GroupFlag::kMajority   ? "majority"
                        : train.group_flags[si] == GroupFlag::kMinority ? "minority"
                                                                        : "none";
    table.rows.push_back({std::to_string(i), format_double(weights.values[i]),
                          train.noise_flags[si] == NoiseFlag::kIntact ? "1" : "0", group});
  }
  return to_csv(table);
}

fs::path cmd_generate(const CommandOptions& options, std::ostream& log) {
  const ConfigFile cfg = load_command_config(options);
  const fs::path dir = output_root(cfg) / "data";
  refuse_existing(dir, options.force);
  const GeneratedTask task = generate_task(cfg.task, cfg.seed);
  write_dataset(dir, kSplitNames[0], task.split.train);
  write_dataset(dir, kSplitNames[1], task.split.validation);
  write_dataset(dir, kSplitNames[2], task.split.test);
  write_file_atomic(dir / "manifest.json", manifest_json(cfg, task));
  log << "wrote " << task.split.train.size() << " train, " << task.split.validation.size()
      << " validation, " << task.split.test.size() << " test rows to " << dir.string() << "\n";
  return dir;
}

fs::path cmd_train(const CommandOptions& options, std::ostream& log) {
  const ConfigFile cfg = load_command_config(options);
  const fs::path root = output_root(cfg);
  const fs::path data_dir = root / "data";
  const std::string run_id = cfg.resolved_run_id();
  const fs::path run_dir = root / "runs" / run_id;
  refuse_existing(run_dir, options.force);

  TrainingData data;
  data.train = read_dataset(data_dir, kSplitNames[0]);
  data.validation = read_dataset(data_dir, kSplitNames[1]);
  data.test = read_dataset(data_dir, kSplitNames[2]);
  data.oracle_weights = oracle_from_manifest(data_dir / "manifest.json", data.train);

  const RunMetrics metrics = run(cfg.train, data);

  write_file_atomic(run_dir / "resolved_config.json", to_json_text(cfg));
  write_file_atomic(run_dir / "metrics.csv", metrics_to_csv(run_id, cfg.seed, metrics));
  write_file_atomic(run_dir / "weights.csv", weights_to_csv(metrics.final_weights, data.train));

  json summary{{"run_id", run_id},
               {"method", std::string(to_string(cfg.train.method))},
               {"seed", cfg.seed},
               {"epochs", metrics.epochs.size()},
               {"final_test_accuracy",
                metrics.epochs.empty() ? json(nullptr) : json(metrics.epochs.back().test_accuracy)},
               {"batches", metrics.batch_stats.batches},
               {"fallback_batches", metrics.batch_stats.fallback_batches},
               {"solves", metrics.batch_stats.solves},
               {"nonconverged_solves", metrics.batch_stats.nonconverged_solves},
               {"log", metrics.log}};
  if (metrics.audit) {
    const WeightAudit& a = *metrics.audit;
    json audit{{"mean_intact", a.mean_intact},
               {"mean_mislabeled", a.mean_mislabeled},
               {"mean_majority", a.mean_majority},
               {"mean_minority", a.mean_minority},
               {"count_intact", a.count_intact},
               {"count_mislabeled", a.count_mislabeled},
               {"count_majority", a.count_majority},
               {"count_minority", a.count_minority}};
    if (a.mae) audit["mae"] = *a.mae;
    if (a.rmse) audit["rmse"] = *a.rmse;
    const double auc = separation_auc(metrics.final_weights.values, data.train);
    if (!std::isnan(auc)) audit["separation_auc"] = auc;
    summary["audit"] = audit;
  }
  write_file_atomic(run_dir / "summary.json", summary.dump(2) + "\n");
  log << run_id << ": " << metrics.epochs.size() << " epochs";
  if (!metrics.epochs.empty()) log << ", test accuracy " << metrics.epochs.back().test_accuracy;
  log << "; wrote " << run_dir.string() << "\n";
  return run_dir;
}

fs::path cmd_report(const CommandOptions& options, std::ostream& log) {
  fs::path run_dir = options.run_dir;
  if (run_dir.empty()) {
    const ConfigFile cfg = load_command_config(options);
    run_dir = output_root(cfg) / "runs" / cfg.resolved_run_id();
  }
  const fs::path weights_path = run_dir / "weights.csv";
  if (!fs::exists(weights_path)) throw PathError("missing " + weights_path.string());

  double box_bound = KernelConfig{}.box_bound;
  if (const fs::path resolved = run_dir / "resolved_config.json"; fs::exists(resolved)) {
    box_bound = parse_config(read_file(resolved)).train.kernel.box_bound;
  }
  const CsvTable table = parse_csv(read_file(weights_path));
  const std::size_t w_col = table.column("weight");
  const std::size_t i_col = table.column("intact");
  std::vector<double> weights;
  std::vector<bool> intact;
  for (const auto& row : table.rows) {
    weights.push_back(parse_double(row[w_col]));
    intact.push_back(row[i_col] == "1");
  }
  const WeightReport report = build_weight_report(weights, intact, box_bound);
  write_file_atomic(run_dir / "report.json", report_to_json(report));
  write_file_atomic(run_dir / "histogram.csv", histogram_to_csv(report));
  for (const auto& note : report.notes) log << "note: " << note << "\n";
  log << "wrote report for " << weights.size() << " weights to " << run_dir.string() << "\n";
  return run_dir;
}

}  // namespace diw::io
