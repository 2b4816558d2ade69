// SPDX-License-Identifier: Apache-2.0
#include "diw/io/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "diw/error.hpp"
#include "diw/io/csv.hpp"

namespace diw::io {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and remembers which were consumed so the
// rest can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    const json* value = take(key);
    if (value == nullptr) return;
    try {
      out = value->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  std::string where(const char* key = nullptr) const {
    const std::string base = path_.empty() ? "config" : path_;
    return key == nullptr ? base : base + "." + key;
  }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + child(key.c_str()));
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::array<std::pair<const char*, Enum>, N>& table,
                const std::string& where) {
  for (const auto& [name, value] : table) {
    if (text == name) return value;
  }
  std::string options;
  for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : ", ") + name;
  throw ConfigError(where + ": unknown value '" + text + "' (expected one of " + options + ")");
}

template <typename Enum, std::size_t N>
std::string enum_name(Enum value, const std::array<std::pair<const char*, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  throw InternalError("enum value without a name");
}

constexpr std::array<std::pair<const char*, TaskSource>, 2> kSources{{
    {"gaussian", TaskSource::kGaussian},
    {"idx", TaskSource::kIdx},
}};
constexpr std::array<std::pair<const char*, ShiftKind>, 4> kShifts{{
    {"none", ShiftKind::kNone},
    {"covariate", ShiftKind::kCovariate},
    {"class_prior", ShiftKind::kClassPrior},
    {"label_noise", ShiftKind::kLabelNoise},
}};
constexpr std::array<std::pair<const char*, NoiseKind>, 2> kNoiseKinds{{
    {"pair", NoiseKind::kPair},
    {"symmetric", NoiseKind::kSymmetric},
}};
constexpr std::array<std::pair<const char*, Activation>, 2> kActivations{{
    {"relu", Activation::kRelu},
    {"tanh", Activation::kTanh},
}};
constexpr std::array<std::pair<const char*, OptimizerKind>, 2> kOptimizers{{
    {"sgd", OptimizerKind::kSgd},
    {"adam", OptimizerKind::kAdam},
}};
constexpr std::array<std::pair<const char*, BandwidthRule>, 3> kBandwidthRules{{
    {"inverse_quantile", BandwidthRule::kInverseQuantile},
    {"quantile", BandwidthRule::kQuantile},
    {"fixed", BandwidthRule::kFixed},
}};

template <typename Enum, std::size_t N>
void read_enum(ObjectReader& r, const char* key, Enum& out,
               const std::array<std::pair<const char*, Enum>, N>& table) {
  std::string text;
  if (r.take(key) == nullptr) return;
  r.read(key, text);
  out = parse_enum(text, table, r.where(key));
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_vector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

GaussianComponent read_component(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
  r.read("mean", mean);
  r.read("covariance", cov);
  r.finish();
  GaussianComponent c;
  c.mean = to_vector(mean);
  const auto d = static_cast<Eigen::Index>(mean.size());
  if (static_cast<Eigen::Index>(cov.size()) != d) {
    throw ConfigError(path + ".covariance must be " + std::to_string(d) + " x " + std::to_string(d));
  }
  c.covariance.resize(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    if (static_cast<Eigen::Index>(cov[static_cast<std::size_t>(a)].size()) != d) {
      throw ConfigError(path + ".covariance must be square");
    }
    for (Eigen::Index b = 0; b < d; ++b) {
      c.covariance(a, b) = cov[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }
  }
  return c;
}

json write_component(const GaussianComponent& c) {
  std::vector<std::vector<double>> cov;
  for (Eigen::Index a = 0; a < c.covariance.rows(); ++a) {
    cov.push_back(from_vector(c.covariance.row(a).transpose()));
  }
  return json{{"mean", from_vector(c.mean)}, {"covariance", cov}};
}

GaussianShiftSpec read_components(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  GaussianShiftSpec spec;
  for (const char* domain : {"train", "test"}) {
    const json* list = r.take(domain);
    if (list == nullptr || !list->is_array()) {
      throw ConfigError(r.where(domain) + " must be an array of components");
    }
    auto& out = std::string_view(domain) == "train" ? spec.train : spec.test;
    for (std::size_t i = 0; i < list->size(); ++i) {
      out.push_back(read_component((*list)[i], r.child(domain) + "[" + std::to_string(i) + "]"));
    }
  }
  std::vector<double> train_priors;
  std::vector<double> test_priors;
  r.read("train_priors", train_priors);
  r.read("test_priors", test_priors);
  r.finish();
  const auto k = spec.train.size();
  if (train_priors.empty()) train_priors.assign(k, 1.0 / static_cast<double>(k));
  if (test_priors.empty()) test_priors.assign(k, 1.0 / static_cast<double>(k));
  spec.train_priors = to_vector(train_priors);
  spec.test_priors = to_vector(test_priors);
  spec.validate();
  return spec;
}

json write_components(const GaussianShiftSpec& spec) {
  json train = json::array();
  json test = json::array();
  for (const auto& c : spec.train) train.push_back(write_component(c));
  for (const auto& c : spec.test) test.push_back(write_component(c));
  return json{{"train", train},
              {"test", test},
              {"train_priors", from_vector(spec.train_priors)},
              {"test_priors", from_vector(spec.test_priors)}};
}

void read_task(const json& j, TaskConfig& t) {
  ObjectReader r(j, "task");
  read_enum(r, "source", t.source, kSources);
  read_enum(r, "shift", t.shift, kShifts);
  r.read("num_classes", t.num_classes);
  r.read("dim", t.dim);
  r.read("radius", t.radius);
  r.read("sigma", t.sigma);
  if (const json* c = r.take("components"); c != nullptr && !c->is_null()) {
    t.components = read_components(*c, "task.components");
  }
  r.read("n_train", t.n_train);
  r.read("n_validation", t.n_validation);
  r.read("n_test", t.n_test);
  r.read("include_validation", t.include_validation);
  if (const json* n = r.take("noise"); n != nullptr) {
    ObjectReader nr(*n, "task.noise");
    read_enum(nr, "kind", t.noise.kind, kNoiseKinds);
    nr.read("rate", t.noise.rate);
    nr.finish();
  }
  if (const json* c = r.take("class_prior"); c != nullptr) {
    ObjectReader cr(*c, "task.class_prior");
    cr.read("mu", t.class_prior.mu);
    cr.read("rho", t.class_prior.rho);
    cr.read("per_majority_count", t.class_prior.per_majority_count);
    cr.read("validation_per_class", t.class_prior.validation_per_class);
    cr.read("test_per_class", t.class_prior.test_per_class);
    cr.read("minority_classes", t.class_prior.minority_classes);
    cr.finish();
  }
  if (const json* x = r.take("idx"); x != nullptr) {
    ObjectReader xr(*x, "task.idx");
    xr.read("train_images", t.idx.train_images);
    xr.read("train_labels", t.idx.train_labels);
    xr.read("test_images", t.idx.test_images);
    xr.read("test_labels", t.idx.test_labels);
    xr.read("num_classes", t.idx.num_classes);
    xr.read("max_train", t.idx.max_train);
    xr.read("max_test", t.idx.max_test);
    xr.finish();
  }
  r.finish();
  if (t.source == TaskSource::kIdx) t.num_classes = t.idx.num_classes;
  if (t.components) {
    t.num_classes = t.components->num_classes();
    t.dim = static_cast<int>(t.components->dim());
  }
  t.noise.num_classes = t.num_classes;
}

void read_train(const json& j, RunConfig& c) {
  ObjectReader r(j, "train");
  std::string method;
  if (r.take("method") != nullptr) {
    r.read("method", method);
    c.method = parse_method(method);
  }
  r.read("epochs", c.epochs);
  r.read("pretrain_epochs", c.pretrain_epochs);
  r.read("batch_size", c.batch_size);
  r.read("validation_batch_size", c.validation_batch_size);
  r.read("weight_mixing", c.weight_mixing);
  r.read("random_mean", c.random_mean);
  r.read("random_stddev", c.random_stddev);
  if (const json* n = r.take("network"); n != nullptr) {
    ObjectReader nr(*n, "train.network");
    nr.read("hidden_widths", c.network.hidden_widths);
    nr.read("dropout_rate", c.network.dropout_rate);
    read_enum(nr, "activation", c.network.activation, kActivations);
    nr.finish();
  }
  if (const json* o = r.take("optimizer"); o != nullptr) {
    ObjectReader orr(*o, "train.optimizer");
    read_enum(orr, "kind", c.optimizer.kind, kOptimizers);
    orr.read("learning_rate", c.optimizer.learning_rate);
    orr.read("weight_decay", c.optimizer.weight_decay);
    orr.read("beta1", c.optimizer.beta1);
    orr.read("beta2", c.optimizer.beta2);
    orr.read("epsilon", c.optimizer.epsilon);
    orr.read("momentum", c.optimizer.momentum);
    orr.read("lr_decay_factor", c.optimizer.lr_decay_factor);
    orr.read("lr_decay_every", c.optimizer.lr_decay_every);
    orr.finish();
  }
  if (const json* k = r.take("kernel"); k != nullptr) {
    ObjectReader kr(*k, "train.kernel");
    read_enum(kr, "bandwidth_rule", c.kernel.bandwidth_rule, kBandwidthRules);
    kr.read("gamma", c.kernel.gamma);
    kr.read("gamma_quantile", c.kernel.gamma_quantile);
    kr.read("ridge", c.kernel.ridge);
    kr.read("box_bound", c.kernel.box_bound);
    kr.read("slack", c.kernel.slack);
    kr.read("project_slack", c.kernel.project_slack);
    kr.finish();
  }
  if (const json* s = r.take("solver"); s != nullptr) {
    ObjectReader sr(*s, "train.solver");
    sr.read("tolerance", c.solver.tolerance);
    sr.read("max_iterations", c.solver.max_iterations);
    sr.finish();
  }
  r.finish();
}

}  // namespace

std::string_view to_string(TaskSource source) {
  return source == TaskSource::kGaussian ? "gaussian" : "idx";
}

std::string_view to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kNone: return "none";
    case ShiftKind::kCovariate: return "covariate";
    case ShiftKind::kClassPrior: return "class_prior";
    case ShiftKind::kLabelNoise: return "label_noise";
  }
  return "unknown";
}

GaussianShiftSpec TaskConfig::gaussian_spec() const {
  if (components) return *components;
  return GaussianShiftSpec::circle(num_classes, dim, radius, sigma);
}

void TaskConfig::validate() const {
  if (num_classes < 2) throw ConfigError("task.num_classes must be >= 2");
  if (source == TaskSource::kGaussian) {
    if (dim < 1) throw ConfigError("task.dim must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("task.sigma must be > 0");
    gaussian_spec().validate();
    if (shift == ShiftKind::kCovariate && !components) {
      throw ConfigError("covariate shift needs explicit task.components");
    }
  } else {
    if (idx.train_images.empty() || idx.train_labels.empty() || idx.test_images.empty() ||
        idx.test_labels.empty()) {
      throw ConfigError("idx source needs train/test image and label paths");
    }
    if (idx.max_train < 0 || idx.max_test < 0) throw ConfigError("idx limits must be >= 0");
  }
  if (n_train < 0 || n_validation < 0 || n_test < 0) {
    throw ConfigError("task sample sizes must be >= 0");
  }
  if (shift == ShiftKind::kLabelNoise) noise_matrix(noise);
  if (shift == ShiftKind::kClassPrior) {
    if (!(class_prior.mu > 0.0 && class_prior.mu < 1.0)) {
      throw ConfigError("task.class_prior.mu must lie in (0, 1)");
    }
    if (!(class_prior.rho >= 1.0)) throw ConfigError("task.class_prior.rho must be >= 1");
    if (class_prior.per_majority_count < 1) {
      throw ConfigError("task.class_prior.per_majority_count must be >= 1");
    }
  }
}

std::string ConfigFile::resolved_run_id() const {
  if (!run_id.empty()) return run_id;
  return std::string(to_string(train.method)) + "-s" + std::to_string(seed);
}

ConfigFile parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  ConfigFile cfg;
  ObjectReader r(doc, "");
  r.read("seed", cfg.seed);
  r.read("output_dir", cfg.output_dir);
  r.read("run_id", cfg.run_id);
  if (const json* t = r.take("task"); t != nullptr) read_task(*t, cfg.task);
  if (const json* t = r.take("train"); t != nullptr) read_train(*t, cfg.train);
  r.finish();
  cfg.train.seed = cfg.seed;
  cfg.task.validate();
  cfg.train.validate();
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path));
}

std::string to_json_text(const ConfigFile& cfg) {
  const TaskConfig& t = cfg.task;
  const RunConfig& c = cfg.train;
  json task{
      {"source", enum_name(t.source, kSources)},
      {"shift", enum_name(t.shift, kShifts)},
      {"num_classes", t.num_classes},
      {"dim", t.dim},
      {"radius", t.radius},
      {"sigma", t.sigma},
      {"components", t.components ? write_components(*t.components) : json(nullptr)},
      {"n_train", t.n_train},
      {"n_validation", t.n_validation},
      {"n_test", t.n_test},
      {"include_validation", t.include_validation},
      {"noise", {{"kind", enum_name(t.noise.kind, kNoiseKinds)}, {"rate", t.noise.rate}}},
      {"class_prior",
       {{"mu", t.class_prior.mu},
        {"rho", t.class_prior.rho},
        {"per_majority_count", t.class_prior.per_majority_count},
        {"validation_per_class", t.class_prior.validation_per_class},
        {"test_per_class", t.class_prior.test_per_class},
        {"minority_classes", t.class_prior.minority_classes}}},
      {"idx",
       {{"train_images", t.idx.train_images},
        {"train_labels", t.idx.train_labels},
        {"test_images", t.idx.test_images},
        {"test_labels", t.idx.test_labels},
        {"num_classes", t.idx.num_classes},
        {"max_train", t.idx.max_train},
        {"max_test", t.idx.max_test}}},
  };
  json train{
      {"method", std::string(to_string(c.method))},
      {"epochs", c.epochs},
      {"pretrain_epochs", c.resolved_pretrain_epochs()},
      {"batch_size", c.batch_size},
      {"validation_batch_size", c.validation_batch_size},
      {"weight_mixing", c.weight_mixing},
      {"random_mean", c.random_mean},
      {"random_stddev", c.random_stddev},
      {"network",
       {{"hidden_widths", c.network.hidden_widths},
        {"dropout_rate", c.network.dropout_rate},
        {"activation", enum_name(c.network.activation, kActivations)}}},
      {"optimizer",
       {{"kind", enum_name(c.optimizer.kind, kOptimizers)},
        {"learning_rate", c.optimizer.learning_rate},
        {"weight_decay", c.optimizer.weight_decay},
        {"beta1", c.optimizer.beta1},
        {"beta2", c.optimizer.beta2},
        {"epsilon", c.optimizer.epsilon},
        {"momentum", c.optimizer.momentum},
        {"lr_decay_factor", c.optimizer.lr_decay_factor},
        {"lr_decay_every", c.optimizer.lr_decay_every}}},
      {"kernel",
       {{"bandwidth_rule", enum_name(c.kernel.bandwidth_rule, kBandwidthRules)},
        {"gamma", c.kernel.gamma},
        {"gamma_quantile", c.kernel.gamma_quantile},
        {"ridge", c.kernel.ridge},
        {"box_bound", c.kernel.box_bound},
        {"slack", c.kernel.slack},
        {"project_slack", c.kernel.project_slack}}},
      {"solver",
       {{"tolerance", c.solver.tolerance}, {"max_iterations", c.solver.max_iterations}}},
  };
  json doc{{"seed", cfg.seed},
           {"output_dir", cfg.output_dir},
           {"run_id", cfg.resolved_run_id()},
           {"task", task},
           {"train", train}};
  return doc.dump(2) + "\n";
}

}  // namespace diw::io
