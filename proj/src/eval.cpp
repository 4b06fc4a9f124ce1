#include "emailad/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "emailad/error.hpp"
#include "emailad/folds.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace {

using Rng = std::mt19937_64;

double ratio(double a, double b) { return b > 0 ? a / b : 0.0; }

std::array<std::vector<std::size_t>, 2> by_class(std::span<const int> y) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 0 && y[i] != 1) throw InvalidArgument("labels must be 0 or 1");
    out[y[i]].push_back(i);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> stratified_fold_assignment(std::span<const int> y, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("need at least 2 folds");
  if (folds > y.size()) throw InvalidArgument("more folds than rows");
  auto classes = by_class(y);
  std::vector<std::size_t> fold(y.size());
  std::size_t next = 0;
  for (int c = 0; c < 2; ++c) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::shuffle(classes[c].begin(), classes[c].end(), rng);
    for (auto i : classes[c]) fold[i] = next++ % folds;
  }
  return fold;
}

EvalReport metrics_from_confusion(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  const double total = static_cast<double>(tp + fp + fn + tn);
  r.accuracy = ratio(static_cast<double>(tp + tn), total);
  r.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  r.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::optional<double> auc_from_scores(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size()) throw InvalidArgument("score and label counts differ");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Walk tie groups in ascending order; each positive beats every negative
  // strictly below it and half of those tied with it.
  double concordant = 0.0;
  std::size_t neg_below = 0, pos = 0, neg = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g, gp = 0, gn = 0;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (y[order[e]] ? gp : gn)++;
      ++e;
    }
    concordant += static_cast<double>(gp) * (static_cast<double>(neg_below) + 0.5 * static_cast<double>(gn));
    neg_below += gn;
    pos += gp;
    neg += gn;
    g = e;
  }
  if (pos == 0 || neg == 0) return std::nullopt;
  return concordant / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> y) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  const auto P = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const auto N = static_cast<double>(y.size()) - P;
  std::vector<RocPoint> out{{0.0, 0.0}};
  double tp = 0, fp = 0;
  for (std::size_t g = 0; g < order.size();) {
    std::size_t e = g;
    while (e < order.size() && scores[order[e]] == scores[order[g]]) {
      (y[order[e]] ? tp : fp) += 1;
      ++e;
    }
    out.push_back({ratio(fp, N), ratio(tp, P)});
    g = e;
  }
  return out;
}

EvalReport compute_metrics(std::span<const Score> scores, std::span<const int> y) {
  if (scores.size() != y.size()) throw InvalidArgument("score and label counts differ");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::vector<double> s(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i].anomalous, truth = y[i] == 1;
    if (pred && truth) ++tp;
    else if (pred) ++fp;
    else if (truth) ++fn;
    else ++tn;
    s[i] = scores[i].anomaly_score();
  }
  EvalReport r = metrics_from_confusion(tp, fp, fn, tn);
  r.auc = auc_from_scores(s, y);
  return r;
}

Split stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in (0, 1)");
  auto classes = by_class(y);
  Split split;
  for (int c = 0; c < 2; ++c) {
    auto& rows = classes[c];
    if (rows.size() < 2) throw InvalidArgument("each class needs at least 2 examples to split");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(rows.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

EvalReport kfold_cv(const ModelSpec& spec, const Matrix& X, std::span<const int> y, std::size_t k,
                    std::uint64_t seed) {
  if (y.size() != X.rows()) throw InvalidArgument("label count does not match row count");
  auto classes = by_class(y);
  if (classes[0].size() < k || classes[1].size() < k)
    throw InvalidArgument("each class needs at least k=" + std::to_string(k) + " examples");
  spec.validate();
  const auto fold = stratified_fold_assignment(y, k, seed);
  std::vector<Score> pooled(X.rows());
  std::vector<EvalReport> per_fold(k);
  parallel_for(k, [&](std::size_t f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < X.rows(); ++i) (fold[i] == f ? test_rows : train_rows).push_back(i);
    ModelSpec s = spec;
    s.seed = derive_seed(spec.seed, f);
    auto model = train(s, select_rows(X, train_rows), select<int>(y, train_rows));
    auto scores = predict(model, select_rows(X, test_rows));
    for (std::size_t t = 0; t < test_rows.size(); ++t) pooled[test_rows[t]] = scores[t];
    per_fold[f] = compute_metrics(scores, select<int>(y, test_rows));
  });
  EvalReport r = compute_metrics(pooled, y);
  r.per_fold = std::move(per_fold);
  return r;
}

std::vector<ModelSpec> grid_cells(const ModelSpec& base, const Grid& grid) {
  std::vector<ModelSpec> cells{base};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw InvalidArgument("grid entry '" + key + "' has no values");
    std::vector<ModelSpec> next;
    for (const auto& c : cells)
      for (double v : values) {
        ModelSpec s = c;
        s.hyperparameters[key] = v;
        next.push_back(std::move(s));
      }
    cells = std::move(next);
  }
  return cells;
}

GridResult grid_search(const ModelSpec& base, const Grid& grid, const Matrix& X, std::span<const int> y,
                       std::size_t k, std::uint64_t seed) {
  GridResult out;
  for (auto& s : grid_cells(base, grid)) {
    s.validate();
    EvalReport r = kfold_cv(s, X, y, k, seed);
    out.cells.push_back({std::move(s), std::move(r)});
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i) {
    const auto& a = out.cells[i].report;
    const auto& b = out.cells[out.best_index].report;
    if (a.accuracy > b.accuracy || (a.accuracy == b.accuracy && a.f1 > b.f1)) out.best_index = i;
  }
  out.best = out.cells[out.best_index].spec;
  return out;
}

std::vector<std::size_t> balance(std::span<const int> y, std::uint64_t seed) {
  auto classes = by_class(y);
  if (classes[0].empty() || classes[1].empty()) throw InvalidArgument("balance needs both classes");
  Rng rng(seed);
  const std::size_t m = std::min(classes[0].size(), classes[1].size());
  std::vector<std::size_t> out;
  for (auto& rows : classes) {
    std::shuffle(rows.begin(), rows.end(), rng);
    out.insert(out.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(m));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace emailad
