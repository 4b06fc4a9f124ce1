#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

double svm_objective(const LinearModel& m, const Matrix& X, std::span<const int> y, double C) {
  double hinge = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = y[i] ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - s * (dot(m.weights, X.row(i)) + m.bias));
  }
  double reg = m.bias * m.bias;
  for (double w : m.weights) reg += w * w;
  return hinge / static_cast<double>(X.rows()) + reg / (2.0 * C);
}

LinearModel fit_linear_svm(const Matrix& X, std::span<const int> y, double C, int epochs, std::uint64_t seed,
                           TrainingTrace* trace) {
  const std::size_t n = X.rows(), d = X.cols();
  const double lambda = 1.0 / C;
  const double radius = 1.0 / std::sqrt(lambda);
  // w[d] is the weight of the constant bias input.
  std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::uint64_t t = 0;
  if (trace) trace->loss.clear();
  // Epoch averages are kept only when they lower the training objective.
  LinearModel out, candidate;
  double best = std::numeric_limits<double>::infinity();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      auto row = X.row(i);
      const double s = y[i] ? 1.0 : -1.0;
      double margin = w[d];
      for (std::size_t j = 0; j < d; ++j) margin += w[j] * row[j];
      margin *= s;
      const double shrink = 1.0 - eta * lambda;
      for (auto& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * s * row[j];
        w[d] += eta * s;
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > radius) {
        for (auto& v : w) v *= radius / norm;
      }
      const double inv_t = 1.0 / static_cast<double>(t);
      for (std::size_t j = 0; j <= d; ++j) avg[j] += (w[j] - avg[j]) * inv_t;
    }
    candidate.weights.assign(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(d));
    candidate.bias = avg[d];
    const double loss = svm_objective(candidate, X, y, C);
    if (loss <= best) {
      best = loss;
      out = candidate;
    }
    if (trace) trace->loss.push_back(best);
  }
  if (trace) trace->converged = true;
  return out;
}

}  // namespace emailad::learn
