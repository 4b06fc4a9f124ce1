#include <algorithm>
#include <cmath>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double objective_and_gradient(const LinearModel& m, const Matrix& X, std::span<const int> y, double lambda,
                              std::vector<double>* grad_w, double* grad_b) {
  const std::size_t n = X.rows(), d = X.cols();
  double loss = 0.0;
  if (grad_w) grad_w->assign(d, 0.0);
  double gb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = X.row(i);
    double z = dot(m.weights, row) + m.bias;
    loss += softplus(z) - y[i] * z;
    if (grad_w) {
      double r = sigmoid(z) - y[i];
      for (std::size_t j = 0; j < d; ++j) (*grad_w)[j] += r * row[j];
      gb += r;
    }
  }
  loss /= static_cast<double>(n);
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  loss += 0.5 * lambda * reg;
  if (grad_w) {
    for (std::size_t j = 0; j < d; ++j) (*grad_w)[j] = (*grad_w)[j] / static_cast<double>(n) + lambda * m.weights[j];
    *grad_b = gb / static_cast<double>(n);
  }
  return loss;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_objective(const LinearModel& m, const Matrix& X, std::span<const int> y, double lambda) {
  return objective_and_gradient(m, X, y, lambda, nullptr, nullptr);
}

LinearModel fit_logreg(const Matrix& X, std::span<const int> y, double lambda, int max_epochs, double tol,
                       TrainingTrace* trace) {
  const std::size_t d = X.cols();
  LinearModel m{std::vector<double>(d, 0.0), 0.0};
  std::vector<double> gw;
  double gb = 0.0;
  double loss = objective_and_gradient(m, X, y, lambda, &gw, &gb);
  double step = 1.0;
  bool converged = false;
  if (trace) trace->loss.clear();
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    double gnorm_inf = std::abs(gb);
    double gnorm_sq = gb * gb;
    for (double g : gw) {
      gnorm_inf = std::max(gnorm_inf, std::abs(g));
      gnorm_sq += g * g;
    }
    if (gnorm_inf < tol) {
      converged = true;
      break;
    }
    // Armijo backtracking; the accepted step never increases the objective.
    step = std::min(step * 2.0, 1e6);
    LinearModel candidate = m;
    double cand_loss = loss;
    for (int tries = 0; tries < 60; ++tries) {
      for (std::size_t j = 0; j < d; ++j) candidate.weights[j] = m.weights[j] - step * gw[j];
      candidate.bias = m.bias - step * gb;
      cand_loss = objective_and_gradient(candidate, X, y, lambda, nullptr, nullptr);
      if (cand_loss <= loss - 0.5 * step * gnorm_sq) break;
      step *= 0.5;
    }
    if (!(cand_loss <= loss)) break;  // no descent possible at machine precision
    m = std::move(candidate);
    loss = objective_and_gradient(m, X, y, lambda, &gw, &gb);
    if (trace) trace->loss.push_back(loss);
  }
  if (trace) trace->converged = converged;
  return m;
}

}  // namespace emailad::learn
