#include <algorithm>
#include <cmath>
#include <numeric>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

AdaBoostModel fit_adaboost(const Matrix& X, std::span<const int> y, std::size_t rounds, TrainingTrace* trace) {
  const std::size_t n = X.rows(), d = X.cols();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<int> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = y[i] ? 1 : -1;

  std::vector<std::vector<std::size_t>> sorted(d, std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), 0);
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](auto a, auto b) { return X(a, f) < X(b, f); });
  }

  AdaBoostModel model;
  for (std::size_t round = 0; round < rounds; ++round) {
    double pos_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (s[i] > 0) pos_total += w[i];

    double best_err = 2.0;
    Stump best;
    for (std::size_t f = 0; f < d; ++f) {
      const auto& idx = sorted[f];
      // err(+1) = weight of positives at or below thr + negatives above thr.
      double pos_below = 0.0, neg_below = 0.0;
      const double neg_total = 1.0 - pos_total;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        std::size_t i = idx[p];
        (s[i] > 0 ? pos_below : neg_below) += w[i];
        double lo = X(i, f), hi = X(idx[p + 1], f);
        if (lo == hi) continue;
        double err_pos = pos_below + (neg_total - neg_below);
        double err_neg = 1.0 - err_pos;
        double thr = 0.5 * (lo + hi);
        if (!(thr < hi)) thr = lo;
        if (err_pos < best_err - 1e-15) {
          best_err = err_pos;
          best = {f, thr, 1};
        }
        if (err_neg < best_err - 1e-15) {
          best_err = err_neg;
          best = {f, thr, -1};
        }
      }
    }
    if (best_err >= 0.5) break;
    const double eps = std::max(best_err, 1e-12);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    model.stumps.push_back(best);
    model.alphas.push_back(alpha);
    model.weighted_errors.push_back(best_err);
    if (best_err <= 1e-12) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      int h = (X(i, best.feature) > best.threshold ? 1 : -1) * best.polarity;
      w[i] *= std::exp(-alpha * s[i] * h);
      total += w[i];
    }
    for (auto& v : w) v /= total;
  }
  if (trace) {
    trace->loss = model.weighted_errors;
    trace->converged = !model.stumps.empty();
  }
  return model;
}

double adaboost_margin(const AdaBoostModel& m, std::span<const double> x) {
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < m.stumps.size(); ++t) {
    const auto& st = m.stumps[t];
    int h = (x[st.feature] > st.threshold ? 1 : -1) * st.polarity;
    num += m.alphas[t] * h;
    den += m.alphas[t];
  }
  return den > 0 ? num / den : 0.0;
}

}  // namespace emailad::learn
