// SPDX-License-Identifier: Apache-2.0
//
// JSON configuration documents. Every key is optional; unknown keys are
// rejected. `to_json_text` writes the fully resolved document, defaults
// included, and parsing that text reproduces the same ConfigFile.
//
//   {
//     "seed": 0,
//     "output_dir": "diw-out",
//     "run_id": "",                      // empty: "<method>-s<seed>"
//     "task": {
//       "source": "gaussian",            // or "idx"
//       "shift": "label_noise",          // none | covariate | class_prior | label_noise
//       "num_classes": 4, "dim": 2, "radius": 2.0, "sigma": 1.0,
//       "components": { ... },           // optional explicit Gaussian spec
//       "n_train": 400, "n_validation": 40, "n_test": 1000,
//       "include_validation": true,
//       "noise": {"kind": "symmetric", "rate": 0.4},
//       "class_prior": {"mu": 0.25, "rho": 20, ...},
//       "idx": {"train_images": "...", ...}
//     },
//     "train": {"method": "diw2-l", "epochs": 30, "network": {...},
//               "optimizer": {...}, "kernel": {...}, "solver": {...}}
//   }
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "diw/shifts.hpp"
#include "diw/trainer.hpp"

namespace diw::io {

enum class TaskSource { kGaussian, kIdx };
enum class ShiftKind { kNone, kCovariate, kClassPrior, kLabelNoise };

std::string_view to_string(TaskSource source);
std::string_view to_string(ShiftKind kind);

struct IdxSource {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  int num_classes = 10;
  int max_train = 0;  // 0 keeps every row left after the validation split
  int max_test = 0;   // 0 keeps every row
};

struct TaskConfig {
  TaskSource source = TaskSource::kGaussian;
  ShiftKind shift = ShiftKind::kLabelNoise;
  int num_classes = 4;
  int dim = 2;
  double radius = 2.0;
  double sigma = 1.0;
  // Replaces the circle layout when present.
  std::optional<GaussianShiftSpec> components;
  int n_train = 400;
  int n_validation = 40;
  int n_test = 1000;
  bool include_validation = true;
  NoiseSpec noise{NoiseKind::kSymmetric, 0.4, 4};
  ClassPriorTaskSpec class_prior;
  IdxSource idx;

  /// The Gaussian spec this task samples from.
  GaussianShiftSpec gaussian_spec() const;
  void validate() const;
};

struct ConfigFile {
  std::uint64_t seed = 0;
  std::string output_dir = "diw-out";
  std::string run_id;
  TaskConfig task;
  RunConfig train;

  /// run_id, or "<method>-s<seed>" when empty.
  std::string resolved_run_id() const;
};

/// Throws ConfigError on malformed JSON, wrong types, unknown keys or invalid
/// values. train.seed always equals seed.
ConfigFile parse_config(std::string_view json_text);
ConfigFile load_config(const std::filesystem::path& path);

/// Resolved document with every default written out.
std::string to_json_text(const ConfigFile& config);

}  // namespace diw::io
