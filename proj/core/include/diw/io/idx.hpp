// SPDX-License-Identifier: Apache-2.0
//
// Big-endian IDX files: images with magic 0x00000803 and dims (n, rows, cols),
// labels with magic 0x00000801 and dim (n). Pixels are scaled to [0, 1].
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "diw/shifts.hpp"

namespace diw::io {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  Eigen::MatrixXd pixels;  // n x (rows * cols), row-major pixel order
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

/// Throws FormatError naming the byte offset on a bad magic number or
/// truncated payload.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Loads both files and checks the counts agree. `num_classes` 0 infers
/// max(label) + 1.
LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        int num_classes = 0);

}  // namespace diw::io
