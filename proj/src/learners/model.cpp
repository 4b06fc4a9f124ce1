#include <cmath>
#include <numeric>

#include "emailad/error.hpp"
#include "emailad/folds.hpp"
#include "emailad/learners.hpp"
#include "emailad/learners/algorithms.hpp"
#include "emailad/learners/one_class_svm.hpp"
#include "emailad/util.hpp"

namespace emailad {

bool StackModel::operator==(const StackModel& o) const { return bases == o.bases && meta == o.meta; }

bool TrainedModel::operator==(const TrainedModel& o) const {
  return spec == o.spec && schema_fingerprint == o.schema_fingerprint && converged == o.converged &&
         parameters == o.parameters;
}

namespace {

void check_inputs(const Matrix& X, std::span<const int> y) {
  if (X.rows() == 0 || X.cols() == 0) throw InvalidArgument("training matrix is empty");
  if (y.size() != X.rows()) throw InvalidArgument("label count does not match row count");
  bool seen[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1) throw InvalidArgument("labels must be 0 (ham) or 1 (anomalous)");
    seen[v] = true;
  }
  if (!seen[0] || !seen[1]) throw InvalidArgument("training labels contain a single class");
  for (double v : X.data())
    if (!std::isfinite(v)) throw InvalidArgument("training matrix contains NaN or Inf");
}

std::size_t as_size(double v) { return static_cast<std::size_t>(v); }

learn::TreeParams tree_params(const ModelSpec& s) {
  learn::TreeParams p;
  p.max_depth = as_size(s.get("max_depth"));
  p.min_samples_leaf = as_size(s.get("min_samples_leaf"));
  if (s.algorithm == Algorithm::RandomForest) p.max_features = as_size(s.get("max_features"));
  return p;
}

TrainedModel train_binary(const ModelSpec& spec, const Matrix& X, std::span<const int> y) {
  TrainedModel model;
  model.spec = spec;
  model.schema_fingerprint = X.schema_fingerprint;
  learn::TrainingTrace trace;
  switch (spec.algorithm) {
    case Algorithm::LogReg:
      model.parameters = learn::fit_logreg(X, y, spec.get("lambda"), static_cast<int>(spec.get("max_epochs")),
                                           spec.get("tol"), &trace);
      break;
    case Algorithm::LinearSVM:
      model.parameters =
          learn::fit_linear_svm(X, y, spec.get("C"), static_cast<int>(spec.get("epochs")), spec.seed, &trace);
      break;
    case Algorithm::DecisionTree: {
      std::vector<double> targets(y.begin(), y.end());
      std::vector<std::size_t> rows(X.rows());
      std::iota(rows.begin(), rows.end(), 0);
      model.parameters = learn::fit_tree(X, targets, rows, tree_params(spec), nullptr);
      break;
    }
    case Algorithm::RandomForest:
      model.parameters = learn::fit_forest(X, y, as_size(spec.get("n_trees")), tree_params(spec), spec.seed);
      break;
    case Algorithm::GradBoostTrees:
      model.parameters =
          learn::fit_gbt(X, y, as_size(spec.get("n_trees")), spec.get("learning_rate"), tree_params(spec));
      break;
    case Algorithm::GaussianNB:
      model.parameters = learn::fit_gaussian_nb(X, y);
      break;
    case Algorithm::KNN:
      model.parameters = learn::fit_knn(X, y, as_size(spec.get("k")));
      break;
    case Algorithm::MLP: {
      learn::MlpParams p;
      p.hidden = as_size(spec.get("hidden"));
      p.learning_rate = spec.get("learning_rate");
      p.alpha = spec.get("alpha");
      p.momentum = spec.get("momentum");
      p.batch_size = as_size(spec.get("batch_size"));
      p.max_epochs = as_size(spec.get("max_epochs"));
      model.parameters = learn::fit_mlp(X, y, p, spec.seed, &trace);
      break;
    }
    case Algorithm::AdaBoostStumps:
      model.parameters = learn::fit_adaboost(X, y, as_size(spec.get("rounds")), &trace);
      break;
    case Algorithm::Stack:
    case Algorithm::OneClassSVM:
      throw InvalidArgument("not a plain binary learner");
  }
  model.converged = trace.converged;
  return model;
}

double decision_of(const TrainedModel& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          const double z = dot(p.weights, x) + p.bias;
          return model.spec.algorithm == Algorithm::LinearSVM ? z : learn::sigmoid(z) - 0.5;
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return p.value(x) - 0.5;
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          return learn::forest_vote_fraction(p, x) - 0.5;
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          return learn::sigmoid(learn::gbt_raw_score(p, x)) - 0.5;
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          return learn::gaussian_nb_posterior(p, x) - 0.5;
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return learn::knn_vote_fraction(p, x) - 0.5;
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          return learn::mlp_probability(p, x) - 0.5;
        } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
          return learn::adaboost_margin(p, x);
        } else if constexpr (std::is_same_v<T, StackModel>) {
          std::vector<double> meta(p.bases.size());
          for (std::size_t b = 0; b < p.bases.size(); ++b) meta[b] = decision_of(p.bases[b], x);
          return learn::sigmoid(dot(p.meta.weights, meta) + p.meta.bias) - 0.5;
        } else {
          double s = -p.rho;
          for (std::size_t i = 0; i < p.coefficients.size(); ++i)
            s += p.coefficients[i] * learn::rbf_kernel(p.support_vectors.row(i), x, p.gamma);
          return s;
        }
      },
      model.parameters);
}

void check_fingerprint(const TrainedModel& model, std::uint64_t fp, std::size_t len) {
  if (fp != model.schema_fingerprint)
    throw FingerprintMismatch("feature vector schema " + hex64(fp) + " does not match model schema " +
                              hex64(model.schema_fingerprint));
  std::size_t expected = 0;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) expected = p.weights.size();
        else if constexpr (std::is_same_v<T, KnnModel>) expected = p.points.cols();
        else if constexpr (std::is_same_v<T, MlpModel>) expected = p.inputs;
        else if constexpr (std::is_same_v<T, NaiveBayesModel>) expected = p.mean[0].size();
        else if constexpr (std::is_same_v<T, OneClassModel>) expected = p.support_vectors.cols();
        else expected = len;
      },
      model.parameters);
  if (expected != len) throw InvalidArgument("feature vector length does not match the model");
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const Matrix& X, std::span<const int> y) {
  spec.validate();
  if (spec.algorithm == Algorithm::OneClassSVM) {
    if (y.size() != X.rows()) throw InvalidArgument("label count does not match row count");
    std::vector<std::size_t> ham;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == 0) ham.push_back(i);
    return train_one_class(spec, select_rows(X, ham));
  }
  if (spec.algorithm == Algorithm::Stack) return train_stack(spec.base_specs, spec, X, y);
  check_inputs(X, y);
  return train_binary(spec, X, y);
}

namespace learn {

OutOfFold stack_out_of_fold(std::span<const ModelSpec> base_specs, const Matrix& X, std::span<const int> y,
                            std::size_t folds, std::uint64_t seed) {
  OutOfFold out;
  out.fold_of_row = stratified_fold_assignment(y, folds, seed);
  out.meta_features = Matrix(X.rows(), base_specs.size());
  const std::size_t cells = folds * base_specs.size();
  std::vector<char> converged(cells, 1);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t f = cell / base_specs.size(), b = cell % base_specs.size();
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < X.rows(); ++i) (out.fold_of_row[i] == f ? test_rows : train_rows).push_back(i);
    Matrix Xt = select_rows(X, train_rows);
    auto yt = select<int>(y, train_rows);
    TrainedModel m = train(base_specs[b], Xt, yt);
    for (auto i : test_rows) out.meta_features(i, b) = decision_of(m, X.row(i));
  });
  return out;
}

}  // namespace learn

TrainedModel train_stack(std::span<const ModelSpec> base_specs, const ModelSpec& meta_spec, const Matrix& X,
                         std::span<const int> y) {
  ModelSpec spec = meta_spec;
  spec.algorithm = Algorithm::Stack;
  spec.base_specs.assign(base_specs.begin(), base_specs.end());
  spec.validate();
  check_inputs(X, y);

  const auto folds = static_cast<std::size_t>(spec.get("folds"));
  auto oof = learn::stack_out_of_fold(spec.base_specs, X, y, folds, derive_seed(spec.seed, 0x51ac));

  StackModel stack;
  stack.bases.resize(spec.base_specs.size());
  parallel_for(spec.base_specs.size(), [&](std::size_t b) { stack.bases[b] = train(spec.base_specs[b], X, y); });
  learn::TrainingTrace trace;
  stack.meta = learn::fit_logreg(oof.meta_features, y, spec.get("lambda"), static_cast<int>(spec.get("max_epochs")),
                                 spec.get("tol"), &trace);

  TrainedModel model;
  model.spec = spec;
  model.schema_fingerprint = X.schema_fingerprint;
  model.converged = trace.converged;
  for (const auto& b : stack.bases) model.converged = model.converged && b.converged;
  model.parameters = std::move(stack);
  return model;
}

TrainedModel train_one_class(const ModelSpec& spec, const Matrix& X_ham) {
  spec.validate();
  if (spec.algorithm != Algorithm::OneClassSVM) throw InvalidArgument("train_one_class needs a OneClassSVM spec");
  if (X_ham.rows() == 0 || X_ham.cols() == 0) throw InvalidArgument("one-class training matrix is empty");
  for (double v : X_ham.data())
    if (!std::isfinite(v)) throw InvalidArgument("training matrix contains NaN or Inf");

  learn::OneClassProblem problem;
  problem.nu = spec.get("nu");
  problem.gamma = spec.get("gamma");
  problem.tolerance = spec.get("tolerance");
  problem.max_iterations = as_size(spec.get("max_iterations"));
  auto sol = learn::solve_one_class(X_ham, problem);

  OneClassModel oc;
  oc.gamma = problem.gamma;
  oc.nu = problem.nu;
  oc.tolerance = problem.tolerance;
  oc.rho = sol.rho;
  oc.support_vectors.schema_fingerprint = X_ham.schema_fingerprint;
  std::vector<std::size_t> sv;
  for (std::size_t i = 0; i < sol.alpha.size(); ++i)
    if (sol.alpha[i] > 0) sv.push_back(i);
  oc.support_vectors = select_rows(X_ham, sv);
  for (auto i : sv) oc.coefficients.push_back(sol.alpha[i]);

  TrainedModel model;
  model.spec = spec;
  model.schema_fingerprint = X_ham.schema_fingerprint;
  model.converged = true;
  model.parameters = std::move(oc);
  return model;
}

Score predict_row(const TrainedModel& model, std::span<const double> x) {
  Score s;
  s.one_class = model.one_class();
  s.decision_value = decision_of(model, x);
  if (s.one_class)
    s.anomalous = s.decision_value < -std::get<OneClassModel>(model.parameters).tolerance;
  else
    s.anomalous = s.decision_value >= 0;
  return s;
}

Score predict(const TrainedModel& model, const FeatureVector& x) {
  check_fingerprint(model, x.schema_fingerprint, x.values.size());
  return predict_row(model, x.values);
}

Score predict_one_class(const TrainedModel& model, const FeatureVector& x) {
  if (!model.one_class()) throw InvalidArgument("predict_one_class needs a one-class model");
  return predict(model, x);
}

std::vector<Score> predict(const TrainedModel& model, const Matrix& X) {
  check_fingerprint(model, X.schema_fingerprint, X.cols());
  std::vector<Score> out(X.rows());
  parallel_for(X.rows(), [&](std::size_t i) { out[i] = predict_row(model, X.row(i)); });
  return out;
}

}  // namespace emailad
