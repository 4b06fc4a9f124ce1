#include <cmath>
#include <numeric>

#include "emailad/learners/algorithms.hpp"
#include "emailad/util.hpp"

namespace emailad::learn {

ForestModel fit_forest(const Matrix& X, std::span<const int> y, std::size_t n_trees, const TreeParams& params,
                       std::uint64_t seed) {
  const std::size_t n = X.rows();
  TreeParams tp = params;
  if (tp.max_features == 0)
    tp.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(X.cols())))));
  std::vector<double> targets(y.begin(), y.end());
  ForestModel forest;
  forest.trees.resize(n_trees);
  forest.tree_seeds.resize(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) forest.tree_seeds[t] = derive_seed(seed, t);
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng(forest.tree_seeds[t]);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = pick(rng);
    forest.trees[t] = fit_tree(X, targets, rows, tp, &rng);
  });
  return forest;
}

double forest_vote_fraction(const ForestModel& m, std::span<const double> x) {
  if (m.trees.empty()) return 0.0;
  std::size_t votes = 0;
  for (const auto& t : m.trees)
    if (t.value(x) >= 0.5) ++votes;
  return static_cast<double>(votes) / static_cast<double>(m.trees.size());
}

}  // namespace emailad::learn
