// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace diw {

using Engine = std::mt19937_64;

/// Derives an independent seed for the named substream `name` and index
/// `index` of a root seed. Streams with different (name, index) pairs do not
/// share state, so consuming one never perturbs another.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

/// Engine seeded from `derive_seed(root, name, index)`.
Engine make_engine(std::uint64_t root, std::string_view name, std::uint64_t index = 0);

/// Canonical substream names. All randomness in a run flows from one root
/// seed through these.
namespace streams {
inline constexpr std::string_view kData = "data";
inline constexpr std::string_view kNoise = "noise";
inline constexpr std::string_view kInit = "init";
inline constexpr std::string_view kBatching = "batching";
inline constexpr std::string_view kValidation = "validation";
inline constexpr std::string_view kDropout = "dropout";
inline constexpr std::string_view kRandomBaseline = "random-baseline";
inline constexpr std::string_view kSubsample = "subsample";
}  // namespace streams

}  // namespace diw
