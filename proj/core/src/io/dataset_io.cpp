// SPDX-License-Identifier: Apache-2.0
#include "diw/io/dataset_io.hpp"

#include <nlohmann/json.hpp>

#include "diw/error.hpp"
#include "diw/io/csv.hpp"

namespace diw::io {
namespace {

using nlohmann::json;

constexpr const char* kFormatName = "diw-dataset";
constexpr int kFormatVersion = 1;

std::vector<std::string> columns_for(Eigen::Index dim) {
  std::vector<std::string> cols{"index", "label", "clean_label", "noise_flag", "group"};
  for (Eigen::Index j = 0; j < dim; ++j) cols.push_back("x" + std::to_string(j));
  return cols;
}

std::string noise_name(NoiseFlag f) { return f == NoiseFlag::kIntact ? "intact" : "mislabeled"; }

NoiseFlag parse_noise(const std::string& s) {
  if (s == "intact") return NoiseFlag::kIntact;
  if (s == "mislabeled") return NoiseFlag::kMislabeled;
  throw InputError("unknown noise flag '" + s + "'");
}

std::string group_name(GroupFlag g) {
  switch (g) {
    case GroupFlag::kNone: return "none";
    case GroupFlag::kMajority: return "majority";
    case GroupFlag::kMinority: return "minority";
  }
  return "none";
}

GroupFlag parse_group(const std::string& s) {
  if (s == "none") return GroupFlag::kNone;
  if (s == "majority") return GroupFlag::kMajority;
  if (s == "minority") return GroupFlag::kMinority;
  throw InputError("unknown group '" + s + "'");
}

}  // namespace

std::string dataset_to_csv(const LabeledDataset& d) {
  CsvTable table;
  table.header = columns_for(d.dim());
  table.rows.reserve(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    std::vector<std::string> row{std::to_string(i), std::to_string(d.given_labels[si]),
                                 std::to_string(d.clean_labels[si]), noise_name(d.noise_flags[si]),
                                 group_name(d.group_flags[si])};
    for (Eigen::Index j = 0; j < d.dim(); ++j) row.push_back(format_double(d.features(i, j)));
    table.rows.push_back(std::move(row));
  }
  return to_csv(table);
}

std::string dataset_sidecar(const LabeledDataset& d) {
  json doc{{"format", kFormatName},
           {"version", kFormatVersion},
           {"rows", d.size()},
           {"dim", d.dim()},
           {"num_classes", d.num_classes},
           {"columns", columns_for(d.dim())}};
  return doc.dump(2) + "\n";
}

LabeledDataset dataset_from_csv(std::string_view csv_text, std::string_view sidecar_text) {
  json meta;
  try {
    meta = json::parse(sidecar_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed dataset sidecar: ") + e.what());
  }
  Eigen::Index rows = 0;
  Eigen::Index dim = 0;
  int k = 0;
  try {
    if (meta.at("format").get<std::string>() != kFormatName ||
        meta.at("version").get<int>() != kFormatVersion) {
      throw InputError("unsupported dataset sidecar format");
    }
    rows = meta.at("rows").get<Eigen::Index>();
    dim = meta.at("dim").get<Eigen::Index>();
    k = meta.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw InputError(std::string("incomplete dataset sidecar: ") + e.what());
  }

  const CsvTable table = parse_csv(csv_text);
  if (table.header != columns_for(dim)) {
    throw InputError("dataset columns do not match the sidecar");
  }
  if (static_cast<Eigen::Index>(table.rows.size()) != rows) {
    throw InputError("dataset has " + std::to_string(table.rows.size()) + " rows, sidecar says " +
                     std::to_string(rows));
  }

  LabeledDataset d;
  d.num_classes = k;
  d.features.resize(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    if (parse_integer(row[0]) != i) {
      throw InputError("dataset row " + std::to_string(i) + " has index " + row[0]);
    }
    d.given_labels.push_back(static_cast<int>(parse_integer(row[1])));
    d.clean_labels.push_back(static_cast<int>(parse_integer(row[2])));
    d.noise_flags.push_back(parse_noise(row[3]));
    d.group_flags.push_back(parse_group(row[4]));
    for (Eigen::Index j = 0; j < dim; ++j) {
      d.features(i, j) = parse_double(row[static_cast<std::size_t>(5 + j)]);
    }
  }
  d.validate();
  return d;
}

void write_dataset(const std::filesystem::path& dir, const std::string& name,
                   const LabeledDataset& dataset) {
  write_file_atomic(dir / (name + ".csv"), dataset_to_csv(dataset));
  write_file_atomic(dir / (name + ".json"), dataset_sidecar(dataset));
}

LabeledDataset read_dataset(const std::filesystem::path& dir, const std::string& name) {
  const auto csv_path = dir / (name + ".csv");
  const auto meta_path = dir / (name + ".json");
  if (!std::filesystem::exists(csv_path)) throw PathError("missing dataset " + csv_path.string());
  if (!std::filesystem::exists(meta_path)) throw PathError("missing sidecar " + meta_path.string());
  return dataset_from_csv(read_file(csv_path), read_file(meta_path));
}

}  // namespace diw::io
