#pragma once

// Classifier set used by the detection pipeline. Every learner trains on a
// standardized matrix with targets ham=0 / anomalous=1 and yields a Score
// whose decision_value is >= 0 exactly when the email is predicted anomalous.
// The one-class SVM is the exception: it trains on ham only and its
// decision_value is >= 0 for inliers, up to the solver tolerance.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "emailad/features.hpp"
#include "emailad/matrix.hpp"

namespace emailad {

enum class Algorithm {
  LogReg,
  LinearSVM,
  DecisionTree,
  RandomForest,
  GradBoostTrees,
  GaussianNB,
  KNN,
  MLP,
  AdaBoostStumps,
  Stack,
  OneClassSVM,
};

std::string_view algorithm_name(Algorithm a);
std::string_view algorithm_display_name(Algorithm a);  // "Random Forest" etc.
std::string_view algorithm_short_name(Algorithm a);    // "RF", "kNN", ...
Algorithm parse_algorithm(std::string_view name);      // accepts algorithm_name or short name

using Hyperparameters = std::map<std::string, double>;

struct ModelSpec {
  Algorithm algorithm = Algorithm::LogReg;
  Hyperparameters hyperparameters;  // unset keys fall back to defaults
  std::uint64_t seed = 0;
  std::vector<ModelSpec> base_specs;  // Stack only

  double get(const std::string& key) const;
  // Throws InvalidArgument for unknown keys or values outside their domain.
  void validate() const;

  bool operator==(const ModelSpec&) const = default;
};

// Default hyperparameters per algorithm, also the list of legal keys.
const Hyperparameters& default_hyperparameters(Algorithm a);

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool operator==(const LinearModel&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf: P(anomalous) for classifiers, additive score for boosting
  bool operator==(const TreeNode&) const = default;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // root at index 0
  std::size_t leaf_of(std::span<const double> x) const;
  double value(std::span<const double> x) const { return nodes[leaf_of(x)].value; }
  std::size_t depth() const;
  bool operator==(const TreeModel&) const = default;
};

struct ForestModel {
  std::vector<TreeModel> trees;
  std::vector<std::uint64_t> tree_seeds;
  bool operator==(const ForestModel&) const = default;
};

struct GbtModel {
  double initial_log_odds = 0.0;
  double learning_rate = 0.1;
  std::vector<TreeModel> trees;
  bool operator==(const GbtModel&) const = default;
};

struct NaiveBayesModel {
  double prior[2] = {0.5, 0.5};
  std::vector<double> mean[2];
  std::vector<double> variance[2];  // floored at 1e-9
  bool operator==(const NaiveBayesModel&) const;
};

struct KnnModel {
  Matrix points;
  std::vector<int> labels;
  std::size_t k = 5;
  bool operator==(const KnnModel&) const = default;
};

struct MlpModel {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;
  bool operator==(const MlpModel&) const = default;
};

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;  // +1: x > threshold votes anomalous
  bool operator==(const Stump&) const = default;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
  std::vector<double> weighted_errors;  // training error of each stump when selected
  bool operator==(const AdaBoostModel&) const = default;
};

struct TrainedModel;

struct StackModel {
  std::vector<TrainedModel> bases;
  LinearModel meta;
  bool operator==(const StackModel&) const;
};

struct OneClassModel {
  Matrix support_vectors;
  std::vector<double> coefficients;  // alpha of each support vector
  double rho = 0.0;
  double gamma = 0.5;
  double nu = 0.1;
  // Solver KKT tolerance. Decision values within it of zero are on the
  // boundary and count as inliers.
  double tolerance = 1e-3;
  bool operator==(const OneClassModel&) const = default;
};

using ModelParameters = std::variant<LinearModel, TreeModel, ForestModel, GbtModel, NaiveBayesModel, KnnModel,
                                     MlpModel, AdaBoostModel, StackModel, OneClassModel>;

struct TrainedModel {
  ModelSpec spec;
  std::uint64_t schema_fingerprint = 0;
  bool converged = true;
  ModelParameters parameters;

  bool one_class() const noexcept { return spec.algorithm == Algorithm::OneClassSVM; }
  bool operator==(const TrainedModel&) const;
};

struct Score {
  double decision_value = 0.0;
  bool anomalous = false;  // one-class: outlier, decision_value < -tolerance
  bool one_class = false;

  // Grows with how anomalous the email looks, whatever the model family.
  double anomaly_score() const noexcept { return one_class ? -decision_value : decision_value; }
};

// Binary training. Throws InvalidArgument for empty input, a single class in
// y, NaN/Inf in X or an invalid spec. Stack and OneClassSVM specs are routed
// to train_stack / train_one_class (the latter uses only rows with y == 0).
TrainedModel train(const ModelSpec& spec, const Matrix& X, std::span<const int> y);

TrainedModel train_stack(std::span<const ModelSpec> base_specs, const ModelSpec& meta_spec, const Matrix& X,
                         std::span<const int> y);

TrainedModel train_one_class(const ModelSpec& spec, const Matrix& X_ham);

// Fingerprint-checked prediction.
Score predict(const TrainedModel& model, const FeatureVector& x);
Score predict_one_class(const TrainedModel& model, const FeatureVector& x);
std::vector<Score> predict(const TrainedModel& model, const Matrix& X);

// No fingerprint check; x must already be aligned with the model.
Score predict_row(const TrainedModel& model, std::span<const double> x);

}  // namespace emailad
