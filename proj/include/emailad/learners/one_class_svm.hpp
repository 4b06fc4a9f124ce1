#pragma once

#include <cstddef>
#include <vector>

#include "emailad/matrix.hpp"

namespace emailad::learn {

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

struct OneClassProblem {
  double nu = 0.1;
  double gamma = 0.5;
  double tolerance = 1e-3;        // stop when the maximal KKT violation drops below this
  std::size_t max_iterations = 0;  // 0: max(10^7, 100 n)
  std::size_t cache_megabytes = 256;
};

struct OneClassSolution {
  std::vector<double> alpha;     // one per training row, sums to 1, each in [0, 1/(nu n)]
  std::vector<double> gradient;  // (K alpha)_i, the training decision values before rho
  double rho = 0.0;
  double upper_bound = 0.0;  // 1/(nu n)
  double max_violation = 0.0;
  std::size_t iterations = 0;
};

// Dual of the nu one-class SVM with an RBF kernel:
//   minimize 1/2 a'Ka  s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
// solved by maximal-violating-pair SMO steps with second-order pair choice.
// Throws ConvergenceError carrying the residual violation when the iteration
// limit is hit.
OneClassSolution solve_one_class(const Matrix& X, const OneClassProblem& problem);

struct KktAudit {
  double sum_deviation = 0.0;    // |sum alpha - 1|
  double box_violation = 0.0;    // largest step outside [0, 1/(nu n)]
  double max_violation = 0.0;    // recomputed from scratch
  double support_fraction = 0.0;  // alpha > 0
  double bounded_fraction = 0.0;  // alpha at the upper bound
  double margin_error_fraction = 0.0;  // decision value < -tolerance
  double negative_decision_fraction = 0.0;  // decision value < 0
};

// Independent check of a solution: recomputes K alpha directly from X.
KktAudit audit_one_class(const Matrix& X, const OneClassSolution& solution, const OneClassProblem& problem);

}  // namespace emailad::learn
