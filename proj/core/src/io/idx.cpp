// SPDX-License-Identifier: Apache-2.0
#include "diw/io/idx.hpp"

#include <algorithm>
#include <cstdio>

#include "diw/error.hpp"
#include "diw/io/csv.hpp"

namespace diw::io {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset, const char* what) {
  if (bytes.size() < offset + 4) {
    throw FormatError(std::string("truncated IDX file: missing ") + what, offset);
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected) {
  const std::uint32_t magic = read_be32(bytes, 0, "magic number");
  if (magic != expected) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "bad IDX magic 0x%08x, expected 0x%08x", magic, expected);
    throw FormatError(buf, 0);
  }
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return std::vector<std::uint8_t>(text.begin(), text.end());
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImageMagic);
  const std::uint32_t n = read_be32(bytes, 4, "image count");
  IdxImages out;
  out.rows = read_be32(bytes, 8, "row count");
  out.cols = read_be32(bytes, 12, "column count");
  const std::size_t width = std::size_t{out.rows} * out.cols;
  const std::size_t need = 16 + std::size_t{n} * width;
  if (bytes.size() < need) {
    throw FormatError("truncated IDX image payload: " + std::to_string(n) + " images need " +
                          std::to_string(need) + " bytes",
                      bytes.size());
  }
  out.pixels.resize(n, static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      out.pixels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          bytes[16 + i * width + j] / 255.0;
    }
  }
  return out;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelMagic);
  const std::uint32_t n = read_be32(bytes, 4, "label count");
  if (bytes.size() < 8 + std::size_t{n}) {
    throw FormatError("truncated IDX label payload: " + std::to_string(n) + " labels", bytes.size());
  }
  return std::vector<int>(bytes.begin() + 8, bytes.begin() + 8 + n);
}

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                        int num_classes) {
  const std::vector<std::uint8_t> image_bytes = slurp(images);
  const std::vector<std::uint8_t> label_bytes = slurp(labels);
  IdxImages parsed = parse_idx_images(image_bytes);
  std::vector<int> y = parse_idx_labels(label_bytes);
  if (static_cast<Eigen::Index>(y.size()) != parsed.pixels.rows()) {
    throw FormatError("count mismatch: " + std::to_string(parsed.pixels.rows()) + " images but " +
                          std::to_string(y.size()) + " labels",
                      4);
  }
  int k = num_classes;
  if (k == 0) k = y.empty() ? 1 : *std::max_element(y.begin(), y.end()) + 1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= k) {
      throw FormatError("label " + std::to_string(y[i]) + " outside [0, " + std::to_string(k) + ")",
                        8 + i);
    }
  }
  return LabeledDataset::from_clean(std::move(parsed.pixels), std::move(y), k);
}

}  // namespace diw::io
