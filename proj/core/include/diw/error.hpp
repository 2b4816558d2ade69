// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace diw {

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
};

/// Root of the library's exception hierarchy. Every error carries the exit
/// code the CLI reports when it escapes a command.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad configuration: dimension mismatches between layers, invalid
/// hyperparameters, unknown config keys, requests that cannot be honoured.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

/// Malformed caller-supplied data: out-of-range labels, width mismatches,
/// nonfinite features.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ExitCode::kData, what) {}
};

/// Data that is well-formed but cannot support the computation, e.g. every
/// pairwise distance is zero so no bandwidth can be derived.
class DegenerateDataError : public InputError {
 public:
  using InputError::InputError;
};

/// Weights that sum to zero and therefore cannot be mean-normalized.
class DegenerateWeightsError : public Error {
 public:
  explicit DegenerateWeightsError(const std::string& what) : Error(ExitCode::kNumeric, what) {}
};

/// A training density of zero where the test density is positive.
class AbsoluteContinuityError : public Error {
 public:
  explicit AbsoluteContinuityError(const std::string& what) : Error(ExitCode::kNumeric, what) {}
};

/// Nonfinite values produced during optimization or a broken numeric
/// invariant.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ExitCode::kNumeric, what) {}
};

/// Binary file that does not follow its declared layout.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset);
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Missing input files or refusal to overwrite existing output.
class PathError : public Error {
 public:
  explicit PathError(const std::string& what) : Error(ExitCode::kData, what) {}
};

/// Broken internal contract (e.g. a forward cache that does not belong to the
/// parameters it is used with).
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ExitCode::kNumeric, what) {}
};

}  // namespace diw
