#include <algorithm>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

KnnModel fit_knn(const Matrix& X, std::span<const int> y, std::size_t k) {
  KnnModel m;
  m.points = X;
  m.labels.assign(y.begin(), y.end());
  m.k = k;
  return m;
}

std::vector<std::size_t> knn_neighbors(const KnnModel& m, std::span<const double> x) {
  const std::size_t n = m.points.rows();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = {squared_distance(m.points.row(i), x), i};
  const std::size_t k = std::min(m.k, n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

double knn_vote_fraction(const KnnModel& m, std::span<const double> x) {
  auto nn = knn_neighbors(m, x);
  if (nn.empty()) return 0.0;
  std::size_t votes = 0;
  for (auto i : nn) votes += m.labels[i] ? 1 : 0;
  return static_cast<double>(votes) / static_cast<double>(nn.size());
}

}  // namespace emailad::learn
