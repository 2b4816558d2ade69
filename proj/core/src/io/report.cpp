// SPDX-License-Identifier: Apache-2.0
#include "diw/io/report.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "diw/error.hpp"
#include "diw/io/csv.hpp"

namespace diw::io {
namespace {

double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

FiveNumber five_number_summary(std::vector<double> values) {
  if (values.empty()) throw InputError("five-number summary of an empty sample");
  std::sort(values.begin(), values.end());
  return FiveNumber{values.front(), interpolated_quantile(values, 0.25),
                    interpolated_quantile(values, 0.5), interpolated_quantile(values, 0.75),
                    values.back()};
}

Histogram fixed_histogram(const std::vector<double>& values, double lower, double upper,
                          int bins) {
  if (bins < 1 || !(upper > lower)) throw InputError("histogram needs bins >= 1 and upper > lower");
  Histogram h;
  h.lower = lower;
  h.upper = upper;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (upper - lower) / bins;
  for (double v : values) {
    int b = 0;
    if (v > upper) {
      b = bins - 1;
      ++h.clamped_above;
    } else if (v < lower) {
      ++h.clamped_below;
    } else {
      b = std::min(bins - 1, static_cast<int>(std::floor((v - lower) / width)));
    }
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

WeightReport build_weight_report(const std::vector<double>& weights,
                                 const std::vector<bool>& intact, double box_bound, int bins) {
  if (weights.size() != intact.size()) throw InputError("weights and flags differ in length");
  WeightReport report;
  report.box_bound = box_bound;
  report.bins = bins;
  for (const bool want_intact : {true, false}) {
    const std::string name = want_intact ? "intact" : "mislabeled";
    std::vector<double> group;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (intact[i] == want_intact) group.push_back(weights[i]);
    }
    if (group.empty()) {
      report.notes.push_back("group " + name + " is empty and was omitted");
      continue;
    }
    GroupReport g;
    g.group = name;
    g.count = static_cast<long long>(group.size());
    g.summary = five_number_summary(group);
    g.histogram = fixed_histogram(group, 0.0, box_bound, bins);
    report.groups.push_back(std::move(g));
  }
  return report;
}

std::string report_to_json(const WeightReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"group", g.group},
                      {"count", g.count},
                      {"min", g.summary.min},
                      {"q1", g.summary.q1},
                      {"median", g.summary.median},
                      {"q3", g.summary.q3},
                      {"max", g.summary.max},
                      {"histogram",
                       {{"lower", g.histogram.lower},
                        {"upper", g.histogram.upper},
                        {"counts", g.histogram.counts},
                        {"clamped_above", g.histogram.clamped_above},
                        {"clamped_below", g.histogram.clamped_below}}}});
  }
  const nlohmann::json doc{{"box_bound", report.box_bound},
                           {"bins", report.bins},
                           {"groups", groups},
                           {"notes", report.notes}};
  return doc.dump(2) + "\n";
}

std::string histogram_to_csv(const WeightReport& report) {
  CsvTable table;
  table.header = {"group", "bin", "lower", "upper", "count"};
  for (const auto& g : report.groups) {
    const auto bins = static_cast<int>(g.histogram.counts.size());
    const double width = (g.histogram.upper - g.histogram.lower) / bins;
    for (int b = 0; b < bins; ++b) {
      table.rows.push_back({g.group, std::to_string(b),
                            format_double(g.histogram.lower + b * width),
                            format_double(g.histogram.lower + (b + 1) * width),
                            std::to_string(g.histogram.counts[static_cast<std::size_t>(b)])});
    }
  }
  return to_csv(table);
}

}  // namespace diw::io
