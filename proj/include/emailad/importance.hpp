#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "emailad/learners.hpp"
#include "emailad/matrix.hpp"

namespace emailad {

struct FeatureImportance {
  std::string name;
  double mean_drop = 0.0;  // baseline accuracy minus shuffled accuracy
  double stddev = 0.0;     // population stddev over repeats
  std::size_t repeats = 0;
  bool operator==(const FeatureImportance&) const = default;
};

// Entries in schema (column) order.
struct ImportanceReport {
  double baseline_accuracy = 0.0;
  std::vector<FeatureImportance> features;

  // Indices by mean drop descending, ties broken by column order.
  std::vector<std::size_t> ranking() const;
  bool operator==(const ImportanceReport&) const = default;
};

// Column j, repeat r is shuffled with derive_seed(seed, j, r).
ImportanceReport permutation_importance(const TrainedModel& model, const Matrix& X, std::span<const int> y,
                                        std::span<const std::string> names, std::size_t repeats,
                                        std::uint64_t seed);

// Averages mean drops (and stddevs) of reports over the same columns.
ImportanceReport average_importance(std::span<const ImportanceReport> reports);

// m > feature count returns all features and warns to diag.
std::vector<std::string> select_top_m(const ImportanceReport& report, std::size_t m, std::ostream* diag = nullptr);

}  // namespace emailad
