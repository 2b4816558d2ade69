// SPDX-License-Identifier: Apache-2.0
#include "diw/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "diw/error.hpp"
#include "diw/rng.hpp"

namespace diw {
namespace {

// Stream indices: high bits select the split, low bits the example.
constexpr std::uint64_t kTrainDomain = 0;
constexpr std::uint64_t kValidationDomain = 1;
constexpr std::uint64_t kTestDomain = 2;
constexpr std::uint64_t kPoolDomain = 3;

std::uint64_t stream_index(std::uint64_t domain, std::uint64_t cls, std::uint64_t i) {
  return (domain << 56) | (cls << 40) | i;
}

struct Sampler {
  std::vector<Eigen::MatrixXd> chol;  // lower Cholesky factor per class
  const std::vector<GaussianComponent>* components;

  explicit Sampler(const std::vector<GaussianComponent>& comps) : components(&comps) {
    for (const auto& c : comps) {
      Eigen::LLT<Eigen::MatrixXd> llt(c.covariance);
      chol.push_back(llt.matrixL());
    }
  }

  Eigen::VectorXd draw(int cls, Engine& engine) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto& c = (*components)[static_cast<std::size_t>(cls)];
    Eigen::VectorXd z(c.mean.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(engine);
    return c.mean + chol[static_cast<std::size_t>(cls)] * z;
  }
};

int draw_class(const Eigen::VectorXd& priors, Engine& engine) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(engine);
  double cum = 0.0;
  for (Eigen::Index c = 0; c + 1 < priors.size(); ++c) {
    cum += priors[c];
    if (u < cum) return static_cast<int>(c);
  }
  return static_cast<int>(priors.size() - 1);
}

LabeledDataset sample_domain(const Sampler& sampler, const Eigen::VectorXd& priors, int n,
                             int num_classes, std::uint64_t seed, std::uint64_t domain) {
  const Eigen::Index dim = (*sampler.components).front().mean.size();
  Eigen::MatrixXd x(n, dim);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Engine engine = make_engine(seed, streams::kData, stream_index(domain, 0, static_cast<std::uint64_t>(i)));
    const int y = draw_class(priors, engine);
    labels[static_cast<std::size_t>(i)] = y;
    x.row(i) = sampler.draw(y, engine).transpose();
  }
  return LabeledDataset::from_clean(std::move(x), std::move(labels), num_classes);
}

LabeledDataset sample_balanced(const Sampler& sampler, int per_class, int num_classes,
                               std::uint64_t seed, std::uint64_t domain) {
  const Eigen::Index dim = (*sampler.components).front().mean.size();
  const int n = per_class * num_classes;
  Eigen::MatrixXd x(n, dim);
  std::vector<int> labels(static_cast<std::size_t>(n));
  int row = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i, ++row) {
      Engine engine = make_engine(seed, streams::kData,
                                  stream_index(domain, static_cast<std::uint64_t>(c),
                                               static_cast<std::uint64_t>(i)));
      labels[static_cast<std::size_t>(row)] = c;
      x.row(row) = sampler.draw(c, engine).transpose();
    }
  }
  return LabeledDataset::from_clean(std::move(x), std::move(labels), num_classes);
}

void check_spd(const Eigen::MatrixXd& cov, const std::string& where) {
  if (cov.rows() != cov.cols()) throw ConfigError(where + " covariance is not square");
  if (!cov.isApprox(cov.transpose(), 1e-12)) throw ConfigError(where + " covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw ConfigError(where + " covariance is not positive definite");
  }
}

void check_priors(const Eigen::VectorXd& priors, int k, const std::string& where) {
  if (priors.size() != k) throw ConfigError(where + " priors must have one entry per class");
  if (priors.minCoeff() < 0.0 || std::abs(priors.sum() - 1.0) > 1e-9) {
    throw ConfigError(where + " priors must be nonnegative and sum to 1");
  }
}

}  // namespace

LabeledDataset LabeledDataset::from_clean(Eigen::MatrixXd features, std::vector<int> labels,
                                          int num_classes) {
  LabeledDataset d;
  const auto n = labels.size();
  d.features = std::move(features);
  d.given_labels = labels;
  d.clean_labels = std::move(labels);
  d.noise_flags.assign(n, NoiseFlag::kIntact);
  d.group_flags.assign(n, GroupFlag::kNone);
  d.num_classes = num_classes;
  return d;
}

void LabeledDataset::validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (given_labels.size() != n || clean_labels.size() != n || noise_flags.size() != n ||
      group_flags.size() != n) {
    throw InputError("dataset columns have inconsistent lengths");
  }
  if (num_classes < 1) throw InputError("dataset needs at least one class");
  for (std::size_t i = 0; i < n; ++i) {
    for (int label : {given_labels[i], clean_labels[i]}) {
      if (label < 0 || label >= num_classes) {
        throw InputError("label " + std::to_string(label) + " at row " + std::to_string(i) +
                         " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
    const bool same = given_labels[i] == clean_labels[i];
    if ((noise_flags[i] == NoiseFlag::kIntact) != same) {
      throw InputError("row " + std::to_string(i) + " noise flag disagrees with its labels");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const Eigen::Index> rows) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::Index i = rows[r];
    const auto si = static_cast<std::size_t>(i);
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(i);
    out.given_labels.push_back(given_labels[si]);
    out.clean_labels.push_back(clean_labels[si]);
    out.noise_flags.push_back(noise_flags[si]);
    out.group_flags.push_back(group_flags[si]);
  }
  return out;
}

LabeledDataset LabeledDataset::concat(const LabeledDataset& other) const {
  if (features.cols() != other.features.cols() && size() > 0 && other.size() > 0) {
    throw InputError("cannot concatenate datasets of different widths");
  }
  LabeledDataset out = *this;
  const Eigen::Index width = size() > 0 ? features.cols() : other.features.cols();
  out.features.resize(size() + other.size(), width);
  if (size() > 0) out.features.topRows(size()) = features;
  if (other.size() > 0) out.features.bottomRows(other.size()) = other.features;
  auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
  append(out.given_labels, other.given_labels);
  append(out.clean_labels, other.clean_labels);
  append(out.noise_flags, other.noise_flags);
  append(out.group_flags, other.group_flags);
  out.num_classes = std::max(num_classes, other.num_classes);
  return out;
}

bool LabeledDataset::operator==(const LabeledDataset& other) const {
  return num_classes == other.num_classes && features.rows() == other.features.rows() &&
         features.cols() == other.features.cols() && features == other.features &&
         given_labels == other.given_labels && clean_labels == other.clean_labels &&
         noise_flags == other.noise_flags && group_flags == other.group_flags;
}

void GaussianShiftSpec::validate() const {
  const int k = num_classes();
  if (k < 1) throw ConfigError("gaussian spec needs at least one class");
  if (static_cast<int>(test.size()) != k) {
    throw ConfigError("gaussian spec needs one test component per class");
  }
  const Eigen::Index d = dim();
  if (d < 1) throw ConfigError("gaussian spec dimension must be positive");
  for (int c = 0; c < k; ++c) {
    for (const auto* comp : {&train[static_cast<std::size_t>(c)], &test[static_cast<std::size_t>(c)]}) {
      if (comp->mean.size() != d || comp->covariance.rows() != d) {
        throw ConfigError("class " + std::to_string(c) + " component has the wrong dimension");
      }
      check_spd(comp->covariance, "class " + std::to_string(c));
    }
  }
  check_priors(train_priors, k, "train");
  check_priors(test_priors, k, "test");
}

GaussianShiftSpec GaussianShiftSpec::circle(int num_classes, int dim, double radius, double sigma) {
  if (num_classes < 1 || dim < 1) throw ConfigError("circle spec needs positive class count and dim");
  GaussianShiftSpec spec;
  for (int c = 0; c < num_classes; ++c) {
    GaussianComponent comp;
    comp.mean = Eigen::VectorXd::Zero(dim);
    if (dim == 1) {
      comp.mean[0] = radius * (c - 0.5 * (num_classes - 1));
    } else {
      const double angle = 2.0 * std::numbers::pi * c / num_classes;
      comp.mean[0] = radius * std::cos(angle);
      comp.mean[1] = radius * std::sin(angle);
    }
    comp.covariance = sigma * sigma * Eigen::MatrixXd::Identity(dim, dim);
    spec.train.push_back(comp);
    spec.test.push_back(std::move(comp));
  }
  spec.train_priors = Eigen::VectorXd::Constant(num_classes, 1.0 / num_classes);
  spec.test_priors = spec.train_priors;
  return spec;
}

Eigen::MatrixXd noise_matrix(const NoiseSpec& spec) {
  const int k = spec.num_classes;
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
    throw InputError("noise rate must lie in [0, 1), got " + std::to_string(spec.rate));
  }
  if (k < 1) throw InputError("noise matrix needs at least one class");
  if (k < 2 && spec.rate > 0.0) throw InputError("label noise needs at least two classes");
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = 1.0 - spec.rate;
    if (k < 2) continue;
    switch (spec.kind) {
      case NoiseKind::kPair:
        t(i, (i + 1) % k) += spec.rate;
        break;
      case NoiseKind::kSymmetric:
        for (int j = 0; j < k; ++j) {
          if (j != i) t(i, j) = spec.rate / (k - 1);
        }
        break;
    }
  }
  return t;
}

LabeledDataset inject_noise(const LabeledDataset& dataset, const NoiseSpec& spec,
                            std::uint64_t seed) {
  if (spec.num_classes != dataset.num_classes) {
    throw InputError("noise spec class count does not match dataset");
  }
  const Eigen::MatrixXd t = noise_matrix(spec);
  LabeledDataset out = dataset;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < out.clean_labels.size(); ++i) {
    Engine engine = make_engine(seed, streams::kNoise, i);
    const int clean = out.clean_labels[i];
    const double u = unit(engine);
    int noisy = spec.num_classes - 1;
    double cum = 0.0;
    for (int j = 0; j < spec.num_classes; ++j) {
      cum += t(clean, j);
      if (u < cum) {
        noisy = j;
        break;
      }
    }
    // Guard against the tail of the cumulative sum landing on a zero entry.
    if (t(clean, noisy) == 0.0) noisy = clean;
    out.given_labels[i] = noisy;
    out.noise_flags[i] = noisy == clean ? NoiseFlag::kIntact : NoiseFlag::kMislabeled;
  }
  return out;
}

int minority_class_count(double mu, int num_classes) {
  return static_cast<int>(std::lround(mu * num_classes));
}

int minority_class_size(int per_majority_count, double rho) {
  return static_cast<int>(std::lround(per_majority_count / rho));
}

LabeledDataset subsample_class_prior(const LabeledDataset& dataset, double mu, double rho,
                                     std::vector<int> minority_classes, int per_majority_count,
                                     std::uint64_t seed) {
  const int k = dataset.num_classes;
  if (!(mu > 0.0 && mu < 1.0)) throw InputError("mu must lie in (0, 1)");
  if (!(rho >= 1.0)) throw InputError("rho must be >= 1");
  if (per_majority_count < 1) throw InputError("per_majority_count must be positive");
  const int n_minority = minority_class_count(mu, k);
  if (minority_classes.empty()) {
    for (int c = k - n_minority; c < k; ++c) minority_classes.push_back(c);
  }
  std::sort(minority_classes.begin(), minority_classes.end());
  if (std::adjacent_find(minority_classes.begin(), minority_classes.end()) !=
      minority_classes.end()) {
    throw InputError("minority classes must be distinct");
  }
  if (static_cast<int>(minority_classes.size()) != n_minority) {
    throw InputError("mu = " + std::to_string(mu) + " with k = " + std::to_string(k) + " implies " +
                     std::to_string(n_minority) + " minority classes, got " +
                     std::to_string(minority_classes.size()));
  }
  for (int c : minority_classes) {
    if (c < 0 || c >= k) throw InputError("minority class " + std::to_string(c) + " out of range");
  }
  const int minority_size = minority_class_size(per_majority_count, rho);

  std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.clean_labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<Eigen::Index> keep;
  std::vector<GroupFlag> flags(static_cast<std::size_t>(dataset.size()), GroupFlag::kNone);
  for (int c = 0; c < k; ++c) {
    const bool minority =
        std::binary_search(minority_classes.begin(), minority_classes.end(), c);
    const int want = minority ? minority_size : per_majority_count;
    auto& rows = by_class[static_cast<std::size_t>(c)];
    if (static_cast<int>(rows.size()) < want) {
      throw InputError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                       " examples but " + std::to_string(want) + " are required");
    }
    Engine engine = make_engine(seed, streams::kSubsample, static_cast<std::uint64_t>(c));
    std::shuffle(rows.begin(), rows.end(), engine);
    for (int j = 0; j < want; ++j) {
      keep.push_back(rows[static_cast<std::size_t>(j)]);
      flags[static_cast<std::size_t>(rows[static_cast<std::size_t>(j)])] =
          minority ? GroupFlag::kMinority : GroupFlag::kMajority;
    }
  }
  std::sort(keep.begin(), keep.end());
  LabeledDataset out = dataset.subset(keep);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    out.group_flags[r] = flags[static_cast<std::size_t>(keep[r])];
  }
  return out;
}

ClassPriorWeights true_class_prior_weights(double mu, double rho) {
  return ClassPriorWeights{1.0 - mu + mu / rho, mu + rho - mu * rho};
}

Eigen::VectorXd class_prior_oracle(const LabeledDataset& dataset, double mu, double rho) {
  const ClassPriorWeights w = true_class_prior_weights(mu, rho);
  Eigen::VectorXd out(dataset.size());
  for (Eigen::Index i = 0; i < dataset.size(); ++i) {
    switch (dataset.group_flags[static_cast<std::size_t>(i)]) {
      case GroupFlag::kMajority:
        out[i] = w.majority;
        break;
      case GroupFlag::kMinority:
        out[i] = w.minority;
        break;
      case GroupFlag::kNone:
        throw InputError("row " + std::to_string(i) + " has no majority/minority flag");
    }
  }
  return out;
}

TaskSplit make_gaussian_task(const GaussianShiftSpec& spec, int n_train, int n_validation,
                             int n_test, std::uint64_t seed, bool include_validation) {
  spec.validate();
  if (n_train < 0 || n_validation < 0 || n_test < 0) throw ConfigError("sample sizes must be >= 0");
  const Sampler train_sampler(spec.train);
  const Sampler test_sampler(spec.test);
  const int k = spec.num_classes();
  TaskSplit split;
  split.train = sample_domain(train_sampler, spec.train_priors, n_train, k, seed, kTrainDomain);
  split.validation =
      sample_domain(test_sampler, spec.test_priors, n_validation, k, seed, kValidationDomain);
  split.test = sample_domain(test_sampler, spec.test_priors, n_test, k, seed, kTestDomain);
  if (include_validation) split.train = split.train.concat(split.validation);
  return split;
}

double gaussian_log_pdf(const GaussianComponent& component, const Eigen::VectorXd& x) {
  Eigen::LLT<Eigen::MatrixXd> llt(component.covariance);
  if (llt.info() != Eigen::Success) throw ConfigError("covariance is not positive definite");
  const Eigen::VectorXd diff = x - component.mean;
  const Eigen::VectorXd solved = llt.matrixL().solve(diff);
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double d = static_cast<double>(x.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + solved.squaredNorm());
}

double analytic_density_ratio(const GaussianShiftSpec& spec, const Eigen::VectorXd& x, int y) {
  if (y < 0 || y >= spec.num_classes()) throw InputError("class index out of range");
  if (x.size() != spec.dim()) throw InputError("point dimension does not match spec");
  const auto cy = static_cast<std::size_t>(y);
  const double log_train = std::log(spec.train_priors[y]) + gaussian_log_pdf(spec.train[cy], x);
  const double log_test = std::log(spec.test_priors[y]) + gaussian_log_pdf(spec.test[cy], x);
  if (!(std::exp(log_train) > 0.0)) {
    throw AbsoluteContinuityError("training density underflows at the query point");
  }
  return std::exp(log_test - log_train);
}

TaskSplit make_label_noise_task(const GaussianShiftSpec& spec, int n_train, int n_validation,
                                int n_test, const NoiseSpec& noise, std::uint64_t seed,
                                bool include_validation) {
  TaskSplit split = make_gaussian_task(spec, n_train, n_validation, n_test, seed, false);
  NoiseSpec resolved = noise;
  resolved.num_classes = spec.num_classes();
  split.train = inject_noise(split.train, resolved, seed);
  if (include_validation) split.train = split.train.concat(split.validation);
  return split;
}

TaskSplit make_class_prior_task(const GaussianShiftSpec& spec, const ClassPriorTaskSpec& prior,
                                std::uint64_t seed, bool include_validation) {
  spec.validate();
  const int k = spec.num_classes();
  if (prior.validation_per_class < 0 || prior.test_per_class < 0) {
    throw ConfigError("per-class sizes must be >= 0");
  }
  const Sampler train_sampler(spec.train);
  const Sampler test_sampler(spec.test);
  const LabeledDataset pool =
      sample_balanced(train_sampler, prior.per_majority_count, k, seed, kPoolDomain);
  TaskSplit split;
  split.train = subsample_class_prior(pool, prior.mu, prior.rho, prior.minority_classes,
                                      prior.per_majority_count, seed);
  split.test = sample_balanced(test_sampler, prior.test_per_class, k, seed, kTestDomain);

  if (include_validation) {
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < split.train.size(); ++i) {
      by_class[static_cast<std::size_t>(split.train.clean_labels[static_cast<std::size_t>(i)])]
          .push_back(i);
    }
    std::vector<Eigen::Index> rows;
    for (int c = 0; c < k; ++c) {
      auto& members = by_class[static_cast<std::size_t>(c)];
      if (static_cast<int>(members.size()) < prior.validation_per_class) {
        throw ConfigError("class " + std::to_string(c) + " has fewer training rows than "
                          "validation_per_class");
      }
      Engine engine = make_engine(seed, streams::kValidation, static_cast<std::uint64_t>(c));
      std::shuffle(members.begin(), members.end(), engine);
      rows.insert(rows.end(), members.begin(), members.begin() + prior.validation_per_class);
    }
    std::sort(rows.begin(), rows.end());
    split.validation = split.train.subset(rows);
  } else {
    split.validation =
        sample_balanced(test_sampler, prior.validation_per_class, k, seed, kValidationDomain);
  }
  return split;
}

}  // namespace diw
