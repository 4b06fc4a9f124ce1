#include <cmath>

#include "emailad/error.hpp"
#include "emailad/learners.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace {

struct AlgorithmInfo {
  Algorithm algorithm;
  std::string_view name;
  std::string_view display;
  std::string_view short_name;
};

constexpr AlgorithmInfo kAlgorithms[] = {
    {Algorithm::LogReg, "LogReg", "Logistic Regression", "LR"},
    {Algorithm::LinearSVM, "LinearSVM", "Support Vector Machine", "SVM"},
    {Algorithm::DecisionTree, "DecisionTree", "Decision Tree", "DT"},
    {Algorithm::RandomForest, "RandomForest", "Random Forest", "RF"},
    {Algorithm::GradBoostTrees, "GradBoostTrees", "Gradient Boosted Regression Trees", "GBT"},
    {Algorithm::GaussianNB, "GaussianNB", "Naive Bayes (Gaussian)", "NB"},
    {Algorithm::KNN, "KNN", "K-Nearest Neighbors", "kNN"},
    {Algorithm::MLP, "MLP", "Multilayer Perceptron Neural Network", "MLP"},
    {Algorithm::AdaBoostStumps, "AdaBoostStumps", "AdaBoost (Tree Stumps)", "AdaBoost"},
    {Algorithm::Stack, "Stack", "Stacked Ensemble", "Stack"},
    {Algorithm::OneClassSVM, "OneClassSVM", "One-Class SVM", "OC-SVM"},
};

const AlgorithmInfo& info(Algorithm a) {
  for (const auto& i : kAlgorithms)
    if (i.algorithm == a) return i;
  throw InvalidArgument("unknown algorithm");
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

}  // namespace

std::string_view algorithm_name(Algorithm a) { return info(a).name; }
std::string_view algorithm_display_name(Algorithm a) { return info(a).display; }
std::string_view algorithm_short_name(Algorithm a) { return info(a).short_name; }

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& i : kAlgorithms)
    if (iequals(name, i.name) || iequals(name, i.short_name)) return i.algorithm;
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "'");
}

const Hyperparameters& default_hyperparameters(Algorithm a) {
  static const std::map<Algorithm, Hyperparameters> defaults = {
      {Algorithm::LogReg, {{"lambda", 1e-3}, {"max_epochs", 5000}, {"tol", 1e-6}}},
      {Algorithm::LinearSVM, {{"C", 1.0}, {"epochs", 30}}},
      {Algorithm::DecisionTree, {{"max_depth", 0}, {"min_samples_leaf", 1}}},
      {Algorithm::RandomForest, {{"n_trees", 100}, {"max_depth", 0}, {"min_samples_leaf", 1}, {"max_features", 0}}},
      {Algorithm::GradBoostTrees, {{"n_trees", 100}, {"learning_rate", 0.1}, {"max_depth", 3}, {"min_samples_leaf", 1}}},
      {Algorithm::GaussianNB, {}},
      {Algorithm::KNN, {{"k", 5}}},
      {Algorithm::MLP,
       {{"hidden", 16}, {"learning_rate", 0.01}, {"alpha", 1e-4}, {"momentum", 0.9}, {"batch_size", 32},
        {"max_epochs", 200}}},
      {Algorithm::AdaBoostStumps, {{"rounds", 100}}},
      {Algorithm::Stack, {{"folds", 5}, {"lambda", 1e-4}, {"max_epochs", 5000}, {"tol", 1e-6}}},
      {Algorithm::OneClassSVM, {{"nu", 0.1}, {"gamma", 0.5}, {"tolerance", 1e-3}, {"max_iterations", 0}}},
  };
  return defaults.at(a);
}

double ModelSpec::get(const std::string& key) const {
  if (auto it = hyperparameters.find(key); it != hyperparameters.end()) return it->second;
  const auto& d = default_hyperparameters(algorithm);
  if (auto it = d.find(key); it != d.end()) return it->second;
  throw InvalidArgument(std::string(algorithm_name(algorithm)) + " has no hyperparameter '" + key + "'");
}

void ModelSpec::validate() const {
  const auto& defaults = default_hyperparameters(algorithm);
  for (const auto& [key, value] : hyperparameters) {
    if (!defaults.contains(key))
      throw InvalidArgument(std::string(algorithm_name(algorithm)) + " has no hyperparameter '" + key + "'");
    if (!std::isfinite(value)) throw InvalidArgument("hyperparameter '" + key + "' is not finite");
  }
  auto require = [&](bool ok, const std::string& key, const char* domain) {
    if (!ok)
      throw InvalidArgument(std::string(algorithm_name(algorithm)) + ": " + key + " must be " + domain +
                            " (got " + std::to_string(get(key)) + ")");
  };
  auto positive_int = [&](const std::string& key) { require(is_integer(get(key)) && get(key) >= 1, key, "an integer >= 1"); };
  auto depth = [&](const std::string& key) { require(is_integer(get(key)) && get(key) >= 0, key, "0 (unbounded) or >= 1"); };
  switch (algorithm) {
    case Algorithm::LogReg:
      require(get("lambda") >= 0, "lambda", ">= 0");
      positive_int("max_epochs");
      require(get("tol") > 0, "tol", "> 0");
      break;
    case Algorithm::LinearSVM:
      require(get("C") > 0, "C", "> 0");
      positive_int("epochs");
      break;
    case Algorithm::DecisionTree:
      depth("max_depth");
      positive_int("min_samples_leaf");
      break;
    case Algorithm::RandomForest:
      positive_int("n_trees");
      depth("max_depth");
      positive_int("min_samples_leaf");
      require(is_integer(get("max_features")) && get("max_features") >= 0, "max_features", "0 (sqrt d) or >= 1");
      break;
    case Algorithm::GradBoostTrees:
      positive_int("n_trees");
      require(get("learning_rate") > 0, "learning_rate", "> 0");
      positive_int("max_depth");
      require(get("max_depth") <= 3, "max_depth", "<= 3");
      positive_int("min_samples_leaf");
      break;
    case Algorithm::GaussianNB:
      break;
    case Algorithm::KNN:
      positive_int("k");
      break;
    case Algorithm::MLP:
      positive_int("hidden");
      require(get("learning_rate") > 0, "learning_rate", "> 0");
      require(get("alpha") >= 0, "alpha", ">= 0");
      require(get("momentum") >= 0 && get("momentum") < 1, "momentum", "in [0, 1)");
      positive_int("batch_size");
      positive_int("max_epochs");
      break;
    case Algorithm::AdaBoostStumps:
      positive_int("rounds");
      break;
    case Algorithm::Stack:
      require(is_integer(get("folds")) && get("folds") >= 2, "folds", "an integer >= 2");
      require(get("lambda") >= 0, "lambda", ">= 0");
      positive_int("max_epochs");
      require(get("tol") > 0, "tol", "> 0");
      if (base_specs.size() < 2) throw InvalidArgument("Stack needs at least 2 base learners");
      for (const auto& b : base_specs) {
        if (b.algorithm == Algorithm::Stack || b.algorithm == Algorithm::OneClassSVM)
          throw InvalidArgument("Stack base learners must be binary classifiers");
        b.validate();
      }
      break;
    case Algorithm::OneClassSVM:
      require(get("nu") > 0 && get("nu") <= 1, "nu", "in (0, 1]");
      require(get("gamma") > 0, "gamma", "> 0");
      require(get("tolerance") > 0, "tolerance", "> 0");
      require(is_integer(get("max_iterations")) && get("max_iterations") >= 0, "max_iterations", ">= 0");
      break;
  }
  if (algorithm != Algorithm::Stack && !base_specs.empty())
    throw InvalidArgument("only Stack specs take base learners");
}

}  // namespace emailad
