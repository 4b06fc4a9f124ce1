#include "emailad/learners/one_class_svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "emailad/error.hpp"

namespace emailad::learn {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  return std::exp(-gamma * squared_distance(a, b));
}

namespace {

class KernelCache {
 public:
  KernelCache(const Matrix& X, double gamma, std::size_t megabytes) : X_(X), gamma_(gamma) {
    const std::size_t row_bytes = std::max<std::size_t>(1, X.rows()) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, megabytes * (std::size_t{1} << 20) / row_bytes);
  }

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    std::vector<double> r(X_.rows());
    auto xi = X_.row(i);
    for (std::size_t j = 0; j < X_.rows(); ++j) r[j] = j == i ? 1.0 : rbf_kernel(xi, X_.row(j), gamma_);
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& X_;
  double gamma_;
  std::size_t capacity_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, decltype(lru_)::iterator> index_;
};

struct Violation {
  double up = -std::numeric_limits<double>::infinity();   // max -G over alpha < C
  double low = -std::numeric_limits<double>::infinity();  // max G over alpha > 0
  double value() const { return up + low; }
};

Violation violation(std::span<const double> alpha, std::span<const double> G, double C) {
  Violation v;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (alpha[t] < C) v.up = std::max(v.up, -G[t]);
    if (alpha[t] > 0) v.low = std::max(v.low, G[t]);
  }
  return v;
}

double compute_rho(std::span<const double> alpha, std::span<const double> G, double C) {
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum = 0.0;
  std::size_t free = 0;
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (alpha[t] >= C) {
      lb = std::max(lb, G[t]);
    } else if (alpha[t] <= 0) {
      ub = std::min(ub, G[t]);
    } else {
      ++free;
      sum += G[t];
    }
  }
  return free > 0 ? sum / static_cast<double>(free) : 0.5 * (ub + lb);
}

}  // namespace

OneClassSolution solve_one_class(const Matrix& X, const OneClassProblem& pb) {
  const std::size_t n = X.rows();
  if (n == 0) throw InvalidArgument("one-class svm: empty training set");
  if (!(pb.nu > 0.0 && pb.nu <= 1.0)) throw InvalidArgument("one-class svm: nu must be in (0, 1]");
  if (!(pb.gamma > 0.0)) throw InvalidArgument("one-class svm: gamma must be positive");

  const double C = 1.0 / (pb.nu * static_cast<double>(n));
  OneClassSolution sol;
  sol.upper_bound = C;
  sol.alpha.assign(n, 0.0);
  sol.gradient.assign(n, 0.0);
  auto& alpha = sol.alpha;
  auto& G = sol.gradient;

  // Feasible start: as many rows at the bound as fit, the remainder on the next.
  const auto full = std::min(n, static_cast<std::size_t>(std::floor(pb.nu * static_cast<double>(n))));
  double left = 1.0;
  for (std::size_t i = 0; i < full; ++i) {
    alpha[i] = C;
    left -= C;
  }
  if (full < n && left > 0) alpha[full] = left;

  KernelCache cache(X, pb.gamma, pb.cache_megabytes);
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] == 0) continue;
    const auto& Ki = cache.row(i);
    for (std::size_t t = 0; t < n; ++t) G[t] += alpha[i] * Ki[t];
  }

  const std::size_t limit = pb.max_iterations ? pb.max_iterations : std::max<std::size_t>(10'000'000, 100 * n);
  constexpr double tau = 1e-12;
  std::size_t iter = 0;
  for (;; ++iter) {
    // i: maximal -G among rows that can grow.
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t)
      if (alpha[t] < C && -G[t] >= gmax) {
        if (-G[t] > gmax || i == n) i = t;
        gmax = -G[t];
      }
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    const std::vector<double>* Ki = i < n ? &cache.row(i) : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      if (!(alpha[t] > 0)) continue;
      gmax2 = std::max(gmax2, G[t]);
      if (!Ki) continue;
      const double diff = gmax + G[t];
      if (diff <= 0) continue;
      double quad = 2.0 - 2.0 * (*Ki)[t];
      if (quad <= 0) quad = tau;
      const double obj = -diff * diff / quad;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    sol.max_violation = gmax + gmax2;
    if (sol.max_violation < pb.tolerance || j == n) break;
    if (iter >= limit) {
      sol.iterations = iter;
      throw ConvergenceError("one-class svm: iteration limit reached", sol.max_violation);
    }

    const auto& Kj = cache.row(j);
    Ki = &cache.row(i);
    double quad = 2.0 - 2.0 * (*Ki)[j];
    if (quad <= 0) quad = tau;
    const double old_i = alpha[i], old_j = alpha[j];
    const double delta = (G[i] - G[j]) / quad;
    const double sum = old_i + old_j;
    double ai = old_i - delta, aj = old_j + delta;
    if (sum > C) {
      if (ai > C) {
        ai = C;
        aj = sum - C;
      }
    } else if (aj < 0) {
      aj = 0;
      ai = sum;
    }
    if (sum > C) {
      if (aj > C) {
        aj = C;
        ai = sum - C;
      }
    } else if (ai < 0) {
      ai = 0;
      aj = sum;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double di = ai - old_i, dj = aj - old_j;
    for (std::size_t t = 0; t < n; ++t) G[t] += di * (*Ki)[t] + dj * Kj[t];
  }
  sol.iterations = iter;
  sol.rho = compute_rho(alpha, G, C);
  return sol;
}

KktAudit audit_one_class(const Matrix& X, const OneClassSolution& sol, const OneClassProblem& pb) {
  const std::size_t n = X.rows();
  const double C = 1.0 / (pb.nu * static_cast<double>(n));
  KktAudit a;
  std::vector<double> G(n, 0.0);
  double sum = 0.0;
  std::size_t support = 0, bounded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = sol.alpha[i];
    sum += ai;
    a.box_violation = std::max({a.box_violation, -ai, ai - C});
    if (ai > 0) ++support;
    if (ai >= C * (1.0 - 1e-12)) ++bounded;
    if (ai == 0) continue;
    for (std::size_t t = 0; t < n; ++t) G[t] += ai * rbf_kernel(X.row(i), X.row(t), pb.gamma);
  }
  a.sum_deviation = std::abs(sum - 1.0);
  a.max_violation = violation(sol.alpha, G, C).value();
  std::size_t margin = 0, negative = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double f = G[t] - sol.rho;
    if (f < -pb.tolerance) ++margin;
    if (f < 0) ++negative;
  }
  const auto dn = static_cast<double>(n);
  a.support_fraction = support / dn;
  a.bounded_fraction = bounded / dn;
  a.margin_error_fraction = margin / dn;
  a.negative_decision_fraction = negative / dn;
  return a;
}

}  // namespace emailad::learn
