#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "emailad/learners/algorithms.hpp"

namespace emailad::learn {

namespace {

// p is clamped so a saturated sigmoid cannot produce an infinite loss.
double cross_entropy(double p, int y) {
  const double eps = 1e-15;
  p = std::clamp(p, eps, 1.0 - eps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace

MlpModel init_mlp(std::size_t inputs, std::size_t hidden, Rng& rng) {
  MlpModel m;
  m.inputs = inputs;
  m.hidden = hidden;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(inputs + hidden));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  std::uniform_real_distribution<double> u1(-bound1, bound1), u2(-bound2, bound2);
  m.w1.resize(hidden * inputs);
  for (auto& w : m.w1) w = u1(rng);
  m.b1.assign(hidden, 0.0);
  m.w2.resize(hidden);
  for (auto& w : m.w2) w = u2(rng);
  m.b2 = 0.0;
  return m;
}

double mlp_probability(const MlpModel& m, std::span<const double> x) {
  double z = m.b2;
  for (std::size_t h = 0; h < m.hidden; ++h) {
    double a = m.b1[h];
    const double* w = m.w1.data() + h * m.inputs;
    for (std::size_t j = 0; j < m.inputs; ++j) a += w[j] * x[j];
    if (a > 0) z += m.w2[h] * a;
  }
  return sigmoid(z);
}

double mlp_loss_and_gradient(const MlpModel& m, const Matrix& X, std::span<const int> y,
                             std::span<const std::size_t> rows, double alpha, MlpModel* g) {
  const std::size_t d = m.inputs, H = m.hidden;
  if (g) {
    g->inputs = d;
    g->hidden = H;
    g->w1.assign(H * d, 0.0);
    g->b1.assign(H, 0.0);
    g->w2.assign(H, 0.0);
    g->b2 = 0.0;
  }
  std::vector<double> act(H);
  double loss = 0.0;
  for (auto i : rows) {
    auto x = X.row(i);
    double z = m.b2;
    for (std::size_t h = 0; h < H; ++h) {
      double a = m.b1[h];
      const double* w = m.w1.data() + h * d;
      for (std::size_t j = 0; j < d; ++j) a += w[j] * x[j];
      act[h] = a > 0 ? a : 0.0;
      z += m.w2[h] * act[h];
    }
    const double p = sigmoid(z);
    loss += cross_entropy(p, y[i]);
    if (!g) continue;
    const double dz = p - y[i];
    g->b2 += dz;
    for (std::size_t h = 0; h < H; ++h) {
      g->w2[h] += dz * act[h];
      if (act[h] <= 0) continue;
      const double da = dz * m.w2[h];
      g->b1[h] += da;
      double* gw = g->w1.data() + h * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += da * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  double reg = 0.0;
  for (double w : m.w1) reg += w * w;
  for (double w : m.w2) reg += w * w;
  loss = loss * inv + 0.5 * alpha * reg;
  if (g) {
    for (std::size_t k = 0; k < g->w1.size(); ++k) g->w1[k] = g->w1[k] * inv + alpha * m.w1[k];
    for (std::size_t h = 0; h < H; ++h) {
      g->w2[h] = g->w2[h] * inv + alpha * m.w2[h];
      g->b1[h] *= inv;
    }
    g->b2 *= inv;
  }
  return loss;
}

std::vector<double> mlp_flatten(const MlpModel& m) {
  std::vector<double> out;
  out.reserve(m.w1.size() + m.b1.size() + m.w2.size() + 1);
  out.insert(out.end(), m.w1.begin(), m.w1.end());
  out.insert(out.end(), m.b1.begin(), m.b1.end());
  out.insert(out.end(), m.w2.begin(), m.w2.end());
  out.push_back(m.b2);
  return out;
}

void mlp_unflatten(std::span<const double> flat, MlpModel& m) {
  auto it = flat.begin();
  std::copy_n(it, m.w1.size(), m.w1.begin());
  it += static_cast<std::ptrdiff_t>(m.w1.size());
  std::copy_n(it, m.b1.size(), m.b1.begin());
  it += static_cast<std::ptrdiff_t>(m.b1.size());
  std::copy_n(it, m.w2.size(), m.w2.begin());
  it += static_cast<std::ptrdiff_t>(m.w2.size());
  m.b2 = *it;
}

MlpModel fit_mlp(const Matrix& X, std::span<const int> y, const MlpParams& p, std::uint64_t seed,
                 TrainingTrace* trace) {
  Rng rng(seed);
  MlpModel m = init_mlp(X.cols(), p.hidden, rng);
  std::vector<double> params = mlp_flatten(m);
  std::vector<double> velocity(params.size(), 0.0);
  std::vector<std::size_t> order(X.rows());
  std::iota(order.begin(), order.end(), 0);
  MlpModel grad;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  bool converged = false;
  if (trace) trace->loss.clear();
  for (std::size_t epoch = 0; epoch < p.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += p.batch_size) {
      std::size_t end = std::min(order.size(), start + p.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      double loss = mlp_loss_and_gradient(m, X, y, batch, p.alpha, &grad);
      epoch_loss += loss * static_cast<double>(batch.size());
      auto g = mlp_flatten(grad);
      for (std::size_t k = 0; k < params.size(); ++k) {
        velocity[k] = p.momentum * velocity[k] - p.learning_rate * g[k];
        params[k] += velocity[k];
      }
      mlp_unflatten(params, m);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (trace) trace->loss.push_back(epoch_loss);
    // Same stopping rule as a no-improvement counter with tolerance tol.
    if (epoch_loss > best - p.tol) {
      if (++stale >= p.patience) {
        converged = true;
        break;
      }
    } else {
      stale = 0;
    }
    best = std::min(best, epoch_loss);
  }
  if (trace) trace->converged = converged;
  return m;
}

}  // namespace emailad::learn
