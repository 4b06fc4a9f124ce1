#include "emailad/model_io.hpp"

#include "emailad/error.hpp"
#include "emailad/learners/algorithms.hpp"
#include "emailad/util.hpp"

namespace emailad {

using nlohmann::json;

namespace {

std::string f64s(std::span<const double> v) { return pack_f64(v); }
std::string f64(double v) { return pack_f64(std::span<const double>(&v, 1)); }

std::vector<double> get_f64s(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw FormatError(std::string("model: missing array '") + key + "'");
  return unpack_f64(j[key].get<std::string>());
}

double get_f64(const json& j, const char* key) {
  auto v = get_f64s(j, key);
  if (v.size() != 1) throw FormatError(std::string("model: '") + key + "' must hold one value");
  return v[0];
}

std::size_t get_size(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned())
    throw FormatError(std::string("model: missing count '") + key + "'");
  return j[key].get<std::size_t>();
}

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"schema_fingerprint", hex64(m.schema_fingerprint)},
          {"data", f64s(m.data())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = get_size(j, "rows"), cols = get_size(j, "cols");
  auto data = get_f64s(j, "data");
  if (data.size() != rows * cols) throw FormatError("model: matrix size mismatch");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  m.schema_fingerprint = parse_hex64(j.at("schema_fingerprint").get<std::string>());
  return m;
}

json linear_to_json(const LinearModel& m) { return {{"weights", f64s(m.weights)}, {"bias", f64(m.bias)}}; }
LinearModel linear_from_json(const json& j) { return {get_f64s(j, "weights"), get_f64(j, "bias")}; }

json tree_to_json(const TreeModel& t) {
  std::vector<double> flat;
  flat.reserve(t.nodes.size() * 5);
  for (const auto& n : t.nodes) {
    flat.push_back(n.feature);
    flat.push_back(n.threshold);
    flat.push_back(n.left);
    flat.push_back(n.right);
    flat.push_back(n.value);
  }
  return {{"nodes", f64s(flat)}};
}

TreeModel tree_from_json(const json& j) {
  auto flat = get_f64s(j, "nodes");
  if (flat.size() % 5 != 0 || flat.empty()) throw FormatError("model: bad tree node array");
  TreeModel t;
  const auto n = static_cast<int>(flat.size() / 5);
  for (int i = 0; i < n; ++i) {
    const double* p = flat.data() + 5 * i;
    TreeNode node{static_cast<int>(p[0]), p[1], static_cast<int>(p[2]), static_cast<int>(p[3]), p[4]};
    if (node.feature >= 0 && (node.left <= i || node.right <= i || node.left >= n || node.right >= n))
      throw FormatError("model: tree child index out of range");
    t.nodes.push_back(node);
  }
  return t;
}

json trees_to_json(const std::vector<TreeModel>& trees) {
  json a = json::array();
  for (const auto& t : trees) a.push_back(tree_to_json(t));
  return a;
}

std::vector<TreeModel> trees_from_json(const json& a) {
  if (!a.is_array()) throw FormatError("model: trees must be an array");
  std::vector<TreeModel> out;
  for (const auto& t : a) out.push_back(tree_from_json(t));
  return out;
}

json parameters_to_json(const ModelParameters& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return {{"kind", "linear"}, {"linear", linear_to_json(p)}};
        } else if constexpr (std::is_same_v<T, TreeModel>) {
          return {{"kind", "tree"}, {"tree", tree_to_json(p)}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          json seeds = json::array();
          for (auto s : p.tree_seeds) seeds.push_back(hex64(s));
          return {{"kind", "forest"}, {"trees", trees_to_json(p.trees)}, {"tree_seeds", seeds}};
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          return {{"kind", "gbt"},
                  {"initial_log_odds", f64(p.initial_log_odds)},
                  {"learning_rate", f64(p.learning_rate)},
                  {"trees", trees_to_json(p.trees)}};
        } else if constexpr (std::is_same_v<T, NaiveBayesModel>) {
          return {{"kind", "naive_bayes"},    {"prior", f64s(std::span<const double>(p.prior, 2))},
                  {"mean0", f64s(p.mean[0])}, {"mean1", f64s(p.mean[1])},
                  {"var0", f64s(p.variance[0])}, {"var1", f64s(p.variance[1])}};
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          return {{"kind", "knn"}, {"points", matrix_to_json(p.points)}, {"labels", p.labels}, {"k", p.k}};
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          return {{"kind", "mlp"}, {"inputs", p.inputs}, {"hidden", p.hidden}, {"flat", f64s(learn::mlp_flatten(p))}};
        } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
          std::vector<double> stumps;
          for (const auto& s : p.stumps) {
            stumps.push_back(static_cast<double>(s.feature));
            stumps.push_back(s.threshold);
            stumps.push_back(s.polarity);
          }
          return {{"kind", "adaboost"},
                  {"stumps", f64s(stumps)},
                  {"alphas", f64s(p.alphas)},
                  {"weighted_errors", f64s(p.weighted_errors)}};
        } else if constexpr (std::is_same_v<T, StackModel>) {
          json bases = json::array();
          for (const auto& b : p.bases) bases.push_back(model_to_json(b));
          return {{"kind", "stack"}, {"bases", bases}, {"meta", linear_to_json(p.meta)}};
        } else {
          return {{"kind", "one_class"},
                  {"support_vectors", matrix_to_json(p.support_vectors)},
                  {"coefficients", f64s(p.coefficients)},
                  {"rho", f64(p.rho)},
                  {"gamma", f64(p.gamma)},
                  {"nu", f64(p.nu)},
                  {"tolerance", f64(p.tolerance)}};
        }
      },
      params);
}

ModelParameters parameters_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return linear_from_json(j.at("linear"));
  if (kind == "tree") return tree_from_json(j.at("tree"));
  if (kind == "forest") {
    ForestModel f;
    f.trees = trees_from_json(j.at("trees"));
    for (const auto& s : j.at("tree_seeds")) f.tree_seeds.push_back(parse_hex64(s.get<std::string>()));
    if (f.trees.size() != f.tree_seeds.size()) throw FormatError("model: forest seed count mismatch");
    return f;
  }
  if (kind == "gbt") return GbtModel{get_f64(j, "initial_log_odds"), get_f64(j, "learning_rate"), trees_from_json(j.at("trees"))};
  if (kind == "naive_bayes") {
    NaiveBayesModel m;
    auto prior = get_f64s(j, "prior");
    if (prior.size() != 2) throw FormatError("model: bad prior");
    m.prior[0] = prior[0];
    m.prior[1] = prior[1];
    m.mean[0] = get_f64s(j, "mean0");
    m.mean[1] = get_f64s(j, "mean1");
    m.variance[0] = get_f64s(j, "var0");
    m.variance[1] = get_f64s(j, "var1");
    const auto d = m.mean[0].size();
    if (m.mean[1].size() != d || m.variance[0].size() != d || m.variance[1].size() != d)
      throw FormatError("model: naive bayes size mismatch");
    return m;
  }
  if (kind == "knn") {
    KnnModel m;
    m.points = matrix_from_json(j.at("points"));
    m.labels = j.at("labels").get<std::vector<int>>();
    m.k = get_size(j, "k");
    if (m.labels.size() != m.points.rows()) throw FormatError("model: knn label count mismatch");
    return m;
  }
  if (kind == "mlp") {
    MlpModel m;
    m.inputs = get_size(j, "inputs");
    m.hidden = get_size(j, "hidden");
    auto flat = get_f64s(j, "flat");
    if (flat.size() != m.hidden * m.inputs + 2 * m.hidden + 1) throw FormatError("model: mlp size mismatch");
    m.w1.resize(m.hidden * m.inputs);
    m.b1.resize(m.hidden);
    m.w2.resize(m.hidden);
    learn::mlp_unflatten(flat, m);
    return m;
  }
  if (kind == "adaboost") {
    AdaBoostModel m;
    auto stumps = get_f64s(j, "stumps");
    if (stumps.size() % 3 != 0) throw FormatError("model: bad stump array");
    for (std::size_t i = 0; i < stumps.size(); i += 3)
      m.stumps.push_back({static_cast<std::size_t>(stumps[i]), stumps[i + 1], static_cast<int>(stumps[i + 2])});
    m.alphas = get_f64s(j, "alphas");
    m.weighted_errors = get_f64s(j, "weighted_errors");
    if (m.alphas.size() != m.stumps.size()) throw FormatError("model: stump weight count mismatch");
    return m;
  }
  if (kind == "stack") {
    StackModel s;
    for (const auto& b : j.at("bases")) s.bases.push_back(model_from_json(b));
    s.meta = linear_from_json(j.at("meta"));
    if (s.meta.weights.size() != s.bases.size()) throw FormatError("model: stack meta size mismatch");
    return s;
  }
  if (kind == "one_class") {
    OneClassModel m;
    m.support_vectors = matrix_from_json(j.at("support_vectors"));
    m.coefficients = get_f64s(j, "coefficients");
    m.rho = get_f64(j, "rho");
    m.gamma = get_f64(j, "gamma");
    m.nu = get_f64(j, "nu");
    m.tolerance = get_f64(j, "tolerance");
    if (m.coefficients.size() != m.support_vectors.rows()) throw FormatError("model: coefficient count mismatch");
    return m;
  }
  throw FormatError("model: unknown parameter kind '" + kind + "'");
}

json spec_to_json(const ModelSpec& s) {
  json hp = json::object();
  for (const auto& [k, v] : s.hyperparameters) hp[k] = f64(v);
  return {{"algorithm", std::string(algorithm_name(s.algorithm))}, {"hyperparameters", hp}, {"seed", hex64(s.seed)}};
}

ModelSpec spec_from_json(const json& j) {
  ModelSpec s;
  s.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  for (const auto& [k, v] : j.at("hyperparameters").items()) {
    auto vals = unpack_f64(v.get<std::string>());
    if (vals.size() != 1) throw FormatError("model: bad hyperparameter '" + k + "'");
    s.hyperparameters[k] = vals[0];
  }
  s.seed = parse_hex64(j.at("seed").get<std::string>());
  return s;
}

}  // namespace

json model_to_json(const TrainedModel& m) {
  json j = spec_to_json(m.spec);
  j["format_version"] = kModelFormatVersion;
  j["schema_fingerprint"] = hex64(m.schema_fingerprint);
  j["convergence_flag"] = m.converged;
  j["parameters"] = parameters_to_json(m.parameters);
  if (!m.spec.base_specs.empty()) {
    json bases = json::array();
    for (const auto& b : m.spec.base_specs) bases.push_back(spec_to_json(b));
    j["base_specs"] = bases;
  }
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    if (!j.is_object()) throw FormatError("model: envelope is not an object");
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      throw FormatError("model: unsupported format_version " + j.at("format_version").dump());
    TrainedModel m;
    m.spec = spec_from_json(j);
    if (j.contains("base_specs"))
      for (const auto& b : j.at("base_specs")) m.spec.base_specs.push_back(spec_from_json(b));
    m.spec.validate();
    m.schema_fingerprint = parse_hex64(j.at("schema_fingerprint").get<std::string>());
    m.converged = j.at("convergence_flag").get<bool>();
    m.parameters = parameters_from_json(j.at("parameters"));
    return m;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

}  // namespace emailad
