#include <algorithm>
#include <cmath>
#include <numeric>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

GbtModel fit_gbt(const Matrix& X, std::span<const int> y, std::size_t n_trees, double learning_rate,
                 const TreeParams& params) {
  const std::size_t n = X.rows();
  double pos = std::accumulate(y.begin(), y.end(), 0.0);
  double p0 = std::clamp(pos / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
  GbtModel m;
  m.learning_rate = learning_rate;
  m.initial_log_odds = std::log(p0 / (1.0 - p0));
  std::vector<double> raw(n, m.initial_log_odds), residual(n), prob(n);
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> leaf_of_row;
  for (std::size_t t = 0; t < n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      prob[i] = sigmoid(raw[i]);
      residual[i] = y[i] - prob[i];
    }
    TreeModel tree = fit_tree(X, residual, rows, params, nullptr, &leaf_of_row);
    // One Newton step per leaf for the log loss.
    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      num[leaf_of_row[i]] += residual[i];
      den[leaf_of_row[i]] += prob[i] * (1.0 - prob[i]);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k)
      if (tree.nodes[k].feature < 0) tree.nodes[k].value = num[k] / std::max(den[k], 1e-12);
    for (std::size_t i = 0; i < n; ++i) raw[i] += learning_rate * tree.nodes[leaf_of_row[i]].value;
    m.trees.push_back(std::move(tree));
  }
  return m;
}

double gbt_raw_score(const GbtModel& m, std::span<const double> x) {
  double s = m.initial_log_odds;
  for (const auto& t : m.trees) s += m.learning_rate * t.value(x);
  return s;
}

}  // namespace emailad::learn
