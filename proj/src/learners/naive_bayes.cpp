#include <cmath>
#include <numbers>

#include "emailad/learners/algorithms.hpp"

namespace emailad {

bool NaiveBayesModel::operator==(const NaiveBayesModel& o) const {
  return prior[0] == o.prior[0] && prior[1] == o.prior[1] && mean[0] == o.mean[0] && mean[1] == o.mean[1] &&
         variance[0] == o.variance[0] && variance[1] == o.variance[1];
}

}  // namespace emailad

namespace emailad::learn {

NaiveBayesModel fit_gaussian_nb(const Matrix& X, std::span<const int> y) {
  const std::size_t d = X.cols();
  NaiveBayesModel m;
  double count[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    m.mean[c].assign(d, 0.0);
    m.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < X.rows(); ++i) {
    int c = y[i] ? 1 : 0;
    count[c] += 1;
    for (std::size_t j = 0; j < d; ++j) m.mean[c][j] += X(i, j);
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : m.mean[c]) v /= count[c];
  for (std::size_t i = 0; i < X.rows(); ++i) {
    int c = y[i] ? 1 : 0;
    for (std::size_t j = 0; j < d; ++j) {
      double diff = X(i, j) - m.mean[c][j];
      m.variance[c][j] += diff * diff;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : m.variance[c]) v = std::max(v / count[c], 1e-9);
    m.prior[c] = count[c] / static_cast<double>(X.rows());
  }
  return m;
}

double gaussian_nb_posterior(const NaiveBayesModel& m, std::span<const double> x) {
  double log_joint[2];
  for (int c = 0; c < 2; ++c) {
    double s = std::log(m.prior[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      double v = m.variance[c][j];
      double diff = x[j] - m.mean[c][j];
      s += -0.5 * std::log(2.0 * std::numbers::pi * v) - diff * diff / (2.0 * v);
    }
    log_joint[c] = s;
  }
  return sigmoid(log_joint[1] - log_joint[0]);
}

}  // namespace emailad::learn
