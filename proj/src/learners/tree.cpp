#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emailad/learners/algorithms.hpp"

namespace emailad {

std::size_t TreeModel::leaf_of(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

std::size_t TreeModel::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {  // children always follow parents
    deepest = std::max(deepest, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

}  // namespace emailad

namespace emailad::learn {

namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

struct Work {
  std::size_t node;
  std::vector<std::size_t> positions;  // indices into the rows span
  std::size_t depth;
};

void search_feature(const Matrix& X, std::span<const double> targets, std::span<const std::size_t> rows,
                    const std::vector<std::size_t>& positions, std::size_t f, std::size_t min_leaf,
                    std::vector<std::pair<double, double>>& buf, Split& best) {
  const std::size_t m = positions.size();
  buf.clear();
  double total = 0.0, total_sq = 0.0;
  for (auto p : positions) {
    double x = X(rows[p], f), t = targets[rows[p]];
    buf.emplace_back(x, t);
    total += t;
    total_sq += t * t;
  }
  std::stable_sort(buf.begin(), buf.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (buf.front().first == buf.back().first) return;
  double left = 0.0, left_sq = 0.0;
  for (std::size_t p = 0; p + 1 < m; ++p) {
    left += buf[p].second;
    left_sq += buf[p].second * buf[p].second;
    const std::size_t nl = p + 1, nr = m - nl;
    if (buf[p].first == buf[p + 1].first || nl < min_leaf || nr < min_leaf) continue;
    const double right = total - left, right_sq = total_sq - left_sq;
    const double cost = (left_sq - left * left / static_cast<double>(nl)) +
                        (right_sq - right * right / static_cast<double>(nr));
    if (!best.found || cost < best.cost - 1e-12 * std::max(1.0, best.cost)) {
      double thr = 0.5 * (buf[p].first + buf[p + 1].first);
      if (!(thr < buf[p + 1].first)) thr = buf[p].first;
      best = {true, f, thr, cost};
    }
  }
}

}  // namespace

TreeModel fit_tree(const Matrix& X, std::span<const double> targets, std::span<const std::size_t> rows,
                   const TreeParams& params, Rng* rng, std::vector<std::size_t>* leaf_of_row) {
  const std::size_t d = X.cols();
  const std::size_t min_leaf = std::max<std::size_t>(1, params.min_samples_leaf);
  TreeModel tree;
  if (leaf_of_row) leaf_of_row->assign(rows.size(), 0);
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), 0);
  std::vector<std::pair<double, double>> buf;

  std::vector<Work> stack;
  tree.nodes.push_back({});
  {
    std::vector<std::size_t> positions(rows.size());
    std::iota(positions.begin(), positions.end(), 0);
    stack.push_back({0, std::move(positions), 0});
  }
  while (!stack.empty()) {
    Work w = std::move(stack.back());
    stack.pop_back();
    const std::size_t m = w.positions.size();
    double sum = 0.0, sum_sq = 0.0;
    for (auto p : w.positions) {
      double t = targets[rows[p]];
      sum += t;
      sum_sq += t * t;
    }
    const double mean = m ? sum / static_cast<double>(m) : 0.0;
    const double sse = sum_sq - sum * mean;
    tree.nodes[w.node].value = mean;

    bool can_split = m >= 2 * min_leaf && sse > 1e-12 * std::max(1.0, sum_sq) &&
                     (params.max_depth == 0 || w.depth < params.max_depth);
    Split best;
    if (can_split) {
      std::vector<std::size_t> candidates;
      std::vector<std::size_t> rest;
      if (params.max_features > 0 && params.max_features < d && rng) {
        std::vector<std::size_t> shuffled = all_features;
        std::shuffle(shuffled.begin(), shuffled.end(), *rng);
        candidates.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(params.max_features));
        rest.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(params.max_features), shuffled.end());
        std::sort(candidates.begin(), candidates.end());
        std::sort(rest.begin(), rest.end());
      } else {
        candidates = all_features;
      }
      for (auto f : candidates) search_feature(X, targets, rows, w.positions, f, min_leaf, buf, best);
      // Only when every sampled feature is constant here, widen the search.
      if (!best.found)
        for (auto f : rest) search_feature(X, targets, rows, w.positions, f, min_leaf, buf, best);
    }
    if (!best.found) {
      if (leaf_of_row)
        for (auto p : w.positions) (*leaf_of_row)[p] = w.node;
      continue;
    }
    std::vector<std::size_t> left, right;
    for (auto p : w.positions) (X(rows[p], best.feature) <= best.threshold ? left : right).push_back(p);
    const int li = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes.push_back({});
    auto& node = tree.nodes[w.node];
    node.feature = static_cast<int>(best.feature);
    node.threshold = best.threshold;
    node.left = li;
    node.right = li + 1;
    stack.push_back({static_cast<std::size_t>(li + 1), std::move(right), w.depth + 1});
    stack.push_back({static_cast<std::size_t>(li), std::move(left), w.depth + 1});
  }
  return tree;
}

}  // namespace emailad::learn
