#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emailad/learners.hpp"
#include "emailad/matrix.hpp"

namespace emailad {

// Anomalous (spam/phishing, or one-class outlier) is the positive class.
struct EvalReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent when the labels hold a single class
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::vector<EvalReport> per_fold;

  std::size_t count() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const EvalReport&) const = default;
};

EvalReport metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);
EvalReport compute_metrics(std::span<const Score> scores, std::span<const int> y);

// Probability that a random positive outscores a random negative, ties
// counted as one half. nullopt for a single-class y.
std::optional<double> auc_from_scores(std::span<const double> scores, std::span<const int> y);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};
// Thresholds at every distinct score, highest first; starts at (0,0), ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> y);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class: round(n_c * test_fraction) rows to test, clamped to [1, n_c - 1].
Split stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed);

// Pooled over folds. Fold f trains with seed derive_seed(spec.seed, f).
// One-class specs train on the ham rows of the training folds.
EvalReport kfold_cv(const ModelSpec& spec, const Matrix& X, std::span<const int> y, std::size_t k,
                    std::uint64_t seed);

// Hyperparameter name -> candidate values. Cells enumerate the Cartesian
// product in key order with the last key varying fastest.
using Grid = std::map<std::string, std::vector<double>>;

struct GridCell {
  ModelSpec spec;
  EvalReport report;
};

struct GridResult {
  ModelSpec best;
  std::size_t best_index = 0;
  std::vector<GridCell> cells;
};

std::vector<ModelSpec> grid_cells(const ModelSpec& base, const Grid& grid);

// Best cell: highest pooled accuracy, then higher F1, then earliest cell.
GridResult grid_search(const ModelSpec& base, const Grid& grid, const Matrix& X, std::span<const int> y,
                       std::size_t k, std::uint64_t seed);

// Majority class downsampled to the minority count, then shuffled.
std::vector<std::size_t> balance(std::span<const int> y, std::uint64_t seed);

}  // namespace emailad
