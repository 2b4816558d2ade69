// SPDX-License-Identifier: Apache-2.0
//
// Dataset files: `<name>.csv` with columns
//   index,label,clean_label,noise_flag,group,x0,...,x{d-1}
// (noise_flag intact|mislabeled, group none|majority|minority) and a JSON
// sidecar `<name>.json` recording the row count, width, class count and
// column list. Features are written in shortest round-trip form, so loading
// reproduces the in-memory dataset exactly.
#pragma once

#include <filesystem>
#include <string>

#include "diw/shifts.hpp"

namespace diw::io {

std::string dataset_to_csv(const LabeledDataset& dataset);
std::string dataset_sidecar(const LabeledDataset& dataset);

/// Throws FormatError/InputError when the CSV and sidecar disagree or the
/// contents do not form a valid dataset.
LabeledDataset dataset_from_csv(std::string_view csv_text, std::string_view sidecar_text);

void write_dataset(const std::filesystem::path& dir, const std::string& name,
                   const LabeledDataset& dataset);

/// Throws PathError when either file is missing.
LabeledDataset read_dataset(const std::filesystem::path& dir, const std::string& name);

}  // namespace diw::io
