#pragma once

// Per-algorithm fitting routines behind emailad::train. Exposed so tests can
// reach training traces and internals (loss histories, gradients, the
// one-class dual solution).

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "emailad/learners.hpp"

namespace emailad::learn {

using Rng = std::mt19937_64;

struct TrainingTrace {
  std::vector<double> loss;  // one entry per epoch
  bool converged = true;
};

// Mean cross-entropy + (lambda/2)|w|^2, full-batch gradient descent with
// backtracking line search. Stops when the gradient inf-norm drops below tol.
LinearModel fit_logreg(const Matrix& X, std::span<const int> y, double lambda, int max_epochs, double tol,
                       TrainingTrace* trace = nullptr);
double logreg_objective(const LinearModel& m, const Matrix& X, std::span<const int> y, double lambda);
double sigmoid(double z);

// Mean hinge + (1/2C)|w|^2 by epoch-shuffled subgradient steps 1/(lambda t)
// with lambda = 1/C. The bias is an extra constant input. Returns the
// averaged iterate; trace.loss holds its objective after every epoch.
LinearModel fit_linear_svm(const Matrix& X, std::span<const int> y, double C, int epochs, std::uint64_t seed,
                           TrainingTrace* trace = nullptr);
double svm_objective(const LinearModel& m, const Matrix& X, std::span<const int> y, double C);

struct TreeParams {
  std::size_t max_depth = 0;  // 0: unbounded
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0: all features
};

// Greedy binary tree on squared error. With 0/1 targets the split choice is
// the Gini choice and leaf values are class probabilities. rows may repeat
// (bootstrap). Ties: lowest feature index, then lowest threshold.
// leaf_of_row, when given, receives the leaf index of every entry of rows.
TreeModel fit_tree(const Matrix& X, std::span<const double> targets, std::span<const std::size_t> rows,
                   const TreeParams& params, Rng* rng, std::vector<std::size_t>* leaf_of_row = nullptr);

ForestModel fit_forest(const Matrix& X, std::span<const int> y, std::size_t n_trees, const TreeParams& params,
                       std::uint64_t seed);
double forest_vote_fraction(const ForestModel& m, std::span<const double> x);

GbtModel fit_gbt(const Matrix& X, std::span<const int> y, std::size_t n_trees, double learning_rate,
                 const TreeParams& params);
double gbt_raw_score(const GbtModel& m, std::span<const double> x);

NaiveBayesModel fit_gaussian_nb(const Matrix& X, std::span<const int> y);
double gaussian_nb_posterior(const NaiveBayesModel& m, std::span<const double> x);  // P(anomalous | x)

KnnModel fit_knn(const Matrix& X, std::span<const int> y, std::size_t k);
double knn_vote_fraction(const KnnModel& m, std::span<const double> x);
// Indices of the k nearest stored rows: distance ascending, then row index.
std::vector<std::size_t> knn_neighbors(const KnnModel& m, std::span<const double> x);

struct MlpParams {
  std::size_t hidden = 16;
  double learning_rate = 0.01;
  double alpha = 1e-4;  // L2 penalty
  double momentum = 0.9;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 200;
  double tol = 1e-4;
  std::size_t patience = 10;
};

MlpModel init_mlp(std::size_t inputs, std::size_t hidden, Rng& rng);
MlpModel fit_mlp(const Matrix& X, std::span<const int> y, const MlpParams& params, std::uint64_t seed,
                 TrainingTrace* trace = nullptr);
double mlp_probability(const MlpModel& m, std::span<const double> x);
// Mean cross-entropy + (alpha/2)(|W1|^2 + |w2|^2) over the given rows and its
// analytic gradient (same layout as the model).
double mlp_loss_and_gradient(const MlpModel& m, const Matrix& X, std::span<const int> y,
                             std::span<const std::size_t> rows, double alpha, MlpModel* gradient);
std::vector<double> mlp_flatten(const MlpModel& m);
void mlp_unflatten(std::span<const double> flat, MlpModel& m);

// Weighted error-minimizing stumps; halts when a stump reaches error >= 0.5
// and after a perfect stump. trace->converged is false if no stump was usable.
AdaBoostModel fit_adaboost(const Matrix& X, std::span<const int> y, std::size_t rounds,
                           TrainingTrace* trace = nullptr);
double adaboost_margin(const AdaBoostModel& m, std::span<const double> x);

struct OutOfFold {
  Matrix meta_features;  // rows of X, one column per base learner
  std::vector<std::size_t> fold_of_row;
};

// Meta-features for stacking: row i is scored by base models trained on the
// folds that do not contain i.
OutOfFold stack_out_of_fold(std::span<const ModelSpec> base_specs, const Matrix& X, std::span<const int> y,
                            std::size_t folds, std::uint64_t seed);

}  // namespace emailad::learn
