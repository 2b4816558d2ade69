// SPDX-License-Identifier: Apache-2.0
//
// Weight-distribution summaries per intact/mislabeled group: box-plot five
// numbers and fixed-bin histograms over [0, B].
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace diw::io {

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quantiles by linear interpolation between order statistics at position
/// p * (n - 1). Throws InputError on an empty sample.
FiveNumber five_number_summary(std::vector<double> values);

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<long long> counts;
  long long clamped_above = 0;  // values > upper, counted in the last bin
  long long clamped_below = 0;  // values < lower, counted in the first bin
};

/// Equal-width bins over [lower, upper]; each bin is half-open except the
/// last, which includes `upper`.
Histogram fixed_histogram(const std::vector<double>& values, double lower, double upper, int bins);

struct GroupReport {
  std::string group;  // "intact" or "mislabeled"
  long long count = 0;
  FiveNumber summary;
  Histogram histogram;
};

struct WeightReport {
  double box_bound = 0.0;
  int bins = 20;
  std::vector<GroupReport> groups;  // nonempty groups only
  std::vector<std::string> notes;   // one line per omitted group
};

WeightReport build_weight_report(const std::vector<double>& weights,
                                 const std::vector<bool>& intact, double box_bound,
                                 int bins = 20);

std::string report_to_json(const WeightReport& report);
/// Columns: group,bin,lower,upper,count.
std::string histogram_to_csv(const WeightReport& report);

}  // namespace diw::io
