#include "emailad/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "emailad/error.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace {

double accuracy(const TrainedModel& model, const Matrix& X, std::span<const int> y) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < X.rows(); ++i)
    if (predict_row(model, X.row(i)).anomalous == (y[i] == 1)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

}  // namespace

std::vector<std::size_t> ImportanceReport::ranking() const {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](auto a, auto b) { return features[a].mean_drop > features[b].mean_drop; });
  return order;
}

ImportanceReport permutation_importance(const TrainedModel& model, const Matrix& X, std::span<const int> y,
                                        std::span<const std::string> names, std::size_t repeats,
                                        std::uint64_t seed) {
  if (repeats < 1) throw InvalidArgument("importance repeats must be >= 1");
  if (X.rows() == 0) throw InvalidArgument("importance needs a non-empty test matrix");
  if (y.size() != X.rows()) throw InvalidArgument("label count does not match row count");
  if (names.size() != X.cols()) throw InvalidArgument("feature name count does not match column count");
  if (X.schema_fingerprint != model.schema_fingerprint)
    throw FingerprintMismatch("test matrix schema " + hex64(X.schema_fingerprint) + " does not match model schema " +
                              hex64(model.schema_fingerprint));
  predict(model, select_rows(X, std::vector<std::size_t>{0}));  // length check

  ImportanceReport report;
  report.baseline_accuracy = accuracy(model, X, y);
  report.features.resize(X.cols());
  parallel_for(X.cols(), [&](std::size_t j) {
    Matrix shuffled = X;
    std::vector<double> column = X.column(j);
    std::vector<double> drops(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
      std::mt19937_64 rng(derive_seed(seed, j, r));
      std::vector<double> perm = column;
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < X.rows(); ++i) shuffled(i, j) = perm[i];
      drops[r] = report.baseline_accuracy - accuracy(model, shuffled, y);
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(repeats);
    double var = 0.0;
    for (double d : drops) var += (d - mean) * (d - mean);
    report.features[j] = {names[j], mean, std::sqrt(var / static_cast<double>(repeats)), repeats};
  });
  return report;
}

ImportanceReport average_importance(std::span<const ImportanceReport> reports) {
  if (reports.empty()) throw InvalidArgument("no importance reports to average");
  ImportanceReport out = reports[0];
  const auto n = static_cast<double>(reports.size());
  for (std::size_t j = 0; j < out.features.size(); ++j) {
    double mean = 0.0, sd = 0.0;
    std::size_t reps = 0;
    for (const auto& r : reports) {
      if (r.features.size() != out.features.size() || r.features[j].name != out.features[j].name)
        throw InvalidArgument("importance reports cover different features");
      mean += r.features[j].mean_drop;
      sd += r.features[j].stddev;
      reps += r.features[j].repeats;
    }
    out.features[j] = {out.features[j].name, mean / n, sd / n, reps};
  }
  double base = 0.0;
  for (const auto& r : reports) base += r.baseline_accuracy;
  out.baseline_accuracy = base / n;
  return out;
}

std::vector<std::string> select_top_m(const ImportanceReport& report, std::size_t m, std::ostream* diag) {
  if (m < 1) throw InvalidArgument("top-m needs m >= 1");
  if (m > report.features.size()) {
    if (diag)
      *diag << "warning: requested top " << m << " of " << report.features.size()
            << " features; keeping all of them\n";
    m = report.features.size();
  }
  auto order = report.ranking();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(report.features[order[i]].name);
  return out;
}

}  // namespace emailad
