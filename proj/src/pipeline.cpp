#include "emailad/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "emailad/error.hpp"
#include "emailad/features.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- config

RunConfig default_config() {
  RunConfig c;
  c.binary_algorithms = {Algorithm::LogReg,       Algorithm::LinearSVM,  Algorithm::GradBoostTrees,
                         Algorithm::MLP,          Algorithm::GaussianNB, Algorithm::RandomForest,
                         Algorithm::DecisionTree, Algorithm::KNN,        Algorithm::AdaBoostStumps};
  c.grids = {
      {Algorithm::LogReg, {{"lambda", {"1e-4", "1e-3", "1e-2"}}}},
      {Algorithm::LinearSVM, {{"C", {"0.1", "1", "10"}}}},
      {Algorithm::RandomForest, {{"n_trees", {"100"}}, {"max_depth", {"inf", "20"}}}},
      {Algorithm::KNN, {{"k", {"1", "3", "5", "7"}}}},
      {Algorithm::MLP, {{"hidden", {"16", "64"}}, {"learning_rate", {"0.01", "0.001"}}}},
      {Algorithm::GradBoostTrees, {{"n_trees", {"100"}}, {"learning_rate", {"0.1"}}}},
      {Algorithm::AdaBoostStumps, {{"rounds", {"100"}}}},
      {Algorithm::OneClassSVM, {{"nu", {"0.05", "0.1", "0.2"}}, {"gamma", {"0.1", "0.5", "1/d"}}}},
  };
  using A = Algorithm;
  c.stacks = {{A::RandomForest, A::MLP, A::KNN},
              {A::RandomForest, A::MLP, A::LinearSVM},
              {A::RandomForest, A::KNN, A::LinearSVM},
              {A::MLP, A::KNN, A::LinearSVM}};
  return c;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw InvalidArgument("config: unknown key '" + key + "' in " + where);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::vector<Algorithm> algorithm_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument("config: '" + where + "' must be a list of algorithm names");
  std::vector<Algorithm> out;
  for (const auto& a : j) out.push_back(parse_algorithm(a.get<std::string>()));
  return out;
}

std::string grid_token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  }
  throw InvalidArgument("config: grid values must be numbers, \"inf\" or \"1/d\"");
}

json token_json(const std::string& t) {
  if (t == "inf" || t == "1/d") return t;
  return std::stod(t);
}

}  // namespace

RunConfig config_from_json(const json& j, const fs::path& base) {
  RunConfig c = default_config();
  reject_unknown(j, {"dataset", "features", "selection", "evaluation", "binary_algorithms", "grids", "stacks", "seed",
                     "output_dir"},
                 "config");
  try {
    if (j.contains("dataset")) {
      const auto& d = j["dataset"];
      reject_unknown(d, {"trec_index", "trec_root", "phishing_dir"}, "dataset");
      c.trec_index = resolve(base, d.value("trec_index", ""));
      c.trec_root = d.contains("trec_root") ? resolve(base, d["trec_root"].get<std::string>()) : c.trec_index.parent_path();
      c.phishing_dir = resolve(base, d.value("phishing_dir", ""));
    }
    if (j.contains("features")) {
      const auto& f = j["features"];
      reject_unknown(f, {"k", "one_hot", "chain_transpose"}, "features");
      c.k = f.value("k", c.k);
      c.one_hot = f.value("one_hot", c.one_hot);
      c.chain_transpose = f.value("chain_transpose", c.chain_transpose);
    }
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      reject_unknown(s, {"importance_repeats", "top_m", "validation_fraction", "models"}, "selection");
      c.importance_repeats = s.value("importance_repeats", c.importance_repeats);
      c.top_m = s.value("top_m", c.top_m);
      c.validation_fraction = s.value("validation_fraction", c.validation_fraction);
      if (s.contains("models")) c.importance_models = algorithm_list(s["models"], "selection.models");
    }
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      reject_unknown(e, {"cv_folds", "test_fraction"}, "evaluation");
      c.cv_folds = e.value("cv_folds", c.cv_folds);
      c.test_fraction = e.value("test_fraction", c.test_fraction);
    }
    if (j.contains("binary_algorithms")) c.binary_algorithms = algorithm_list(j["binary_algorithms"], "binary_algorithms");
    if (j.contains("grids")) {
      for (const auto& [name, grid] : j["grids"].items()) {
        GridTokens tokens;
        for (const auto& [key, values] : grid.items()) {
          if (!values.is_array()) throw InvalidArgument("config: grid '" + name + "." + key + "' must be a list");
          for (const auto& v : values) tokens[key].push_back(grid_token(v));
        }
        c.grids[parse_algorithm(name)] = tokens;
      }
    }
    if (j.contains("stacks")) {
      c.stacks.clear();
      for (const auto& s : j["stacks"]) c.stacks.push_back(algorithm_list(s, "stacks"));
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = resolve(base, j["output_dir"].get<std::string>());
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  if (c.k < 1) throw InvalidArgument("config: features.k must be >= 1");
  if (c.top_m < 1) throw InvalidArgument("config: selection.top_m must be >= 1");
  if (c.importance_repeats < 1) throw InvalidArgument("config: selection.importance_repeats must be >= 1");
  if (c.cv_folds < 2) throw InvalidArgument("config: evaluation.cv_folds must be >= 2");
  if (!(c.test_fraction > 0 && c.test_fraction < 1)) throw InvalidArgument("config: evaluation.test_fraction must be in (0, 1)");
  if (!(c.validation_fraction > 0 && c.validation_fraction < 1))
    throw InvalidArgument("config: selection.validation_fraction must be in (0, 1)");
  for (const auto& s : c.stacks)
    if (s.size() < 2) throw InvalidArgument("config: every stack needs at least 2 base learners");
  for (const auto& [alg, tokens] : c.grids) resolve_grid(tokens, 1);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("config " + path.string() + " is not valid JSON");
  return config_from_json(j, fs::absolute(path).parent_path());
}

json config_to_json(const RunConfig& c) {
  auto names = [](const std::vector<Algorithm>& v) {
    json a = json::array();
    for (auto x : v) a.push_back(std::string(algorithm_name(x)));
    return a;
  };
  json grids = json::object();
  for (const auto& [alg, tokens] : c.grids) {
    json g = json::object();
    for (const auto& [key, values] : tokens) {
      json list = json::array();
      for (const auto& v : values) list.push_back(token_json(v));
      g[key] = list;
    }
    grids[std::string(algorithm_name(alg))] = g;
  }
  json stacks = json::array();
  for (const auto& s : c.stacks) stacks.push_back(names(s));
  return {{"dataset",
           {{"trec_index", c.trec_index.generic_string()},
            {"trec_root", c.trec_root.generic_string()},
            {"phishing_dir", c.phishing_dir.generic_string()}}},
          {"features", {{"k", c.k}, {"one_hot", c.one_hot}, {"chain_transpose", c.chain_transpose}}},
          {"selection",
           {{"importance_repeats", c.importance_repeats},
            {"top_m", c.top_m},
            {"validation_fraction", c.validation_fraction},
            {"models", names(c.importance_models)}}},
          {"evaluation", {{"cv_folds", c.cv_folds}, {"test_fraction", c.test_fraction}}},
          {"binary_algorithms", names(c.binary_algorithms)},
          {"grids", grids},
          {"stacks", stacks},
          {"seed", c.seed},
          {"output_dir", c.output_dir.generic_string()}};
}

Grid resolve_grid(const GridTokens& tokens, std::size_t d) {
  Grid g;
  for (const auto& [key, values] : tokens)
    for (const auto& t : values) {
      if (t == "inf") g[key].push_back(0.0);
      else if (t == "1/d") g[key].push_back(1.0 / static_cast<double>(std::max<std::size_t>(1, d)));
      else {
        std::size_t used = 0;
        double v = 0;
        try {
          v = std::stod(t, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != t.size() || t.empty()) throw InvalidArgument("config: bad grid value '" + t + "' for " + key);
        g[key].push_back(v);
      }
    }
  return g;
}

// ---------------------------------------------------------------- data

Datasets load_datasets(const RunConfig& c, std::ostream* diag) {
  Datasets d;
  if (c.trec_index.empty()) throw InvalidArgument("config: dataset.trec_index is required");
  d.a = load_trec_index(c.trec_index, c.trec_root, diag);
  if (!c.phishing_dir.empty()) {
    if (!fs::is_directory(c.phishing_dir)) throw IoError("phishing directory " + c.phishing_dir.string() + " not found");
    d.b = load_labeled_dir(c.phishing_dir, Label::Phishing, diag);
  }
  return d;
}

void write_header_cache(std::ostream& out, std::span<const CorpusRecord> records, std::span<const std::string> fields) {
  auto cell = [](const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  out << "id,label";
  for (const auto& f : fields) out << ',' << cell(f);
  out << '\n';
  for (const auto& r : records) {
    out << cell(r.id) << ',' << label_name(r.label);
    for (const auto& f : fields) {
      std::string joined;
      for (const auto* field : r.header.find_all(f)) {
        if (!joined.empty()) joined += '\n';
        joined += field->raw_value;
      }
      out << ',' << cell(joined);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------- phases

namespace {

struct PhaseData {
  std::vector<CorpusRecord> records;
  std::vector<int> y;
  FeatureSet feature_set = FeatureSet::Full;
  bool one_class = false;
  std::string positive;
  std::string title;
};

const char* phase_title(int phase) {
  switch (phase) {
    case 1: return "Ham and spam, binary classification";
    case 2: return "Ham and phishing, binary classification (domain matching features)";
    case 3: return "Ham and spam, one-class classification";
    case 4: return "Ham and phishing, one-class classification (domain matching features)";
  }
  throw InvalidArgument("phase must be 1, 2, 3 or 4");
}

std::uint64_t phase_seed(const RunConfig& c, int phase) { return derive_seed(c.seed, 0x9a5e, static_cast<std::uint64_t>(phase)); }

PhaseData phase_data(int phase, const RunConfig& c, const Datasets& data) {
  PhaseData p;
  p.title = phase_title(phase);
  p.one_class = phase >= 3;
  if (phase == 1 || phase == 3) {
    p.records = data.a.records;
    p.positive = "spam";
  } else {
    if (!data.b) throw InvalidArgument("phase " + std::to_string(phase) + " needs dataset.phishing_dir");
    p.feature_set = FeatureSet::DomainMatchOnly;
    p.positive = "phishing";
    // Ham from dataset A, sampled down to the size of the phishing set.
    std::vector<const CorpusRecord*> ham;
    for (const auto& r : data.a.records)
      if (r.label == Label::Ham) ham.push_back(&r);
    std::mt19937_64 rng(derive_seed(phase_seed(c, 2), 0x4a3));
    std::shuffle(ham.begin(), ham.end(), rng);
    ham.resize(std::min(ham.size(), data.b->records.size()));
    std::sort(ham.begin(), ham.end(), [](auto a, auto b) { return a->id < b->id; });
    for (const auto* r : ham) p.records.push_back(*r);
    p.records.insert(p.records.end(), data.b->records.begin(), data.b->records.end());
  }
  if (p.records.empty()) throw InvalidArgument("phase " + std::to_string(phase) + ": no emails loaded");
  p.y = binary_targets(p.records);
  return p;
}

std::vector<std::size_t> class_rows(std::span<const std::size_t> rows, std::span<const int> y, int cls) {
  std::vector<std::size_t> out;
  for (auto r : rows)
    if (y[r] == cls) out.push_back(r);
  return out;
}

Matrix with_columns(const Matrix& X, std::span<const std::size_t> cols, std::uint64_t fingerprint) {
  Matrix out = select_columns(X, cols);
  out.schema_fingerprint = fingerprint;
  return out;
}

ModelSpec default_spec(Algorithm a, std::uint64_t seed) {
  ModelSpec s;
  s.algorithm = a;
  s.seed = derive_seed(seed, 0x5eed, static_cast<std::uint64_t>(a));
  return s;
}

struct Prepared {
  PhaseData data;
  Matrix X;  // extracted against `schema`, not yet scaled
  FeatureSchema schema;
  Split split;
  SelectionResult selection;
};

// Importance of the informative columns for each ranking model, measured on
// an inner validation split of the training rows.
ImportanceReport rank_features(const Prepared& p, const RunConfig& c, std::uint64_t seed, std::ostream* log) {
  const auto& y = p.data.y;
  auto ytr = select<int>(y, p.split.train);
  Split inner = stratified_split(ytr, c.validation_fraction, derive_seed(seed, 0x1a));
  auto rows_of = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> out;
    for (auto i : idx) out.push_back(p.split.train[i]);
    return out;
  };
  auto fit_rows = rows_of(inner.train), val_rows = rows_of(inner.test);
  if (p.data.one_class) {
    fit_rows = class_rows(fit_rows, y, 0);
    std::vector<int> yv = select<int>(y, val_rows);
    auto bal = balance(yv, derive_seed(seed, 0x1b));
    std::vector<std::size_t> b;
    for (auto i : bal) b.push_back(val_rows[i]);
    val_rows = std::move(b);
  }
  const Matrix Xfit_raw = select_rows(p.X, fit_rows);
  const ScalerParams scaler = fit_scaler(Xfit_raw);
  const Matrix Xfit = apply_scaler(Xfit_raw, scaler);
  const Matrix Xval = apply_scaler(select_rows(p.X, val_rows), scaler);
  const auto yfit = select<int>(y, fit_rows), yval = select<int>(y, val_rows);
  const auto names = p.schema.names();

  std::vector<Algorithm> rankers = p.data.one_class ? std::vector<Algorithm>{Algorithm::OneClassSVM} : c.importance_models;
  std::vector<ImportanceReport> reports;
  for (auto a : rankers) {
    ModelSpec spec = default_spec(a, seed);
    if (a == Algorithm::OneClassSVM) spec.hyperparameters["gamma"] = 1.0 / static_cast<double>(names.size());
    TrainedModel m = train(spec, Xfit, yfit);
    reports.push_back(permutation_importance(m, Xval, yval, names, c.importance_repeats,
                                             derive_seed(seed, 0x1c, static_cast<std::uint64_t>(a))));
    if (log) *log << "  importance by " << algorithm_short_name(a) << ": baseline accuracy "
                  << format_percent(reports.back().baseline_accuracy) << "\n";
  }
  return average_importance(reports);
}

Prepared prepare(int phase, const RunConfig& c, const Datasets& data, std::ostream* log) {
  Prepared p;
  p.data = phase_data(phase, c, data);
  const std::uint64_t seed = phase_seed(c, phase);
  const FeatureSchema full =
      fit_schema(p.data.records, c.k, p.data.feature_set, SchemaOptions{c.one_hot, c.chain_transpose});
  const Matrix X0 = extract_matrix(p.data.records, full);
  p.split = stratified_split(p.data.y, c.test_fraction, derive_seed(seed, 0x5011));

  std::ostringstream notes;
  auto keep = informative_columns(select_rows(X0, p.split.train), full.names(), &notes);
  {
    std::set<std::size_t> kept(keep.begin(), keep.end());
    for (std::size_t i = 0; i < full.size(); ++i)
      if (!kept.contains(i)) p.selection.dropped.push_back(full.descriptors[i].name);
  }
  if (log) *log << notes.str();
  if (keep.empty()) throw InvalidArgument("phase " + std::to_string(phase) + ": no informative features");
  p.schema = full.subset(keep);
  p.X = with_columns(X0, keep, p.schema.fingerprint);
  p.selection.schema = p.schema;

  if (p.data.feature_set == FeatureSet::Full) {
    p.selection.importance = rank_features(p, c, seed, log);
    p.selection.selected = select_top_m(*p.selection.importance, c.top_m, log);
    std::vector<std::size_t> idx;
    const auto names = p.schema.names();
    for (const auto& n : p.selection.selected)
      idx.push_back(static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin()));
    std::sort(idx.begin(), idx.end());
    p.schema = p.schema.subset(idx);
    p.X = with_columns(p.X, idx, p.schema.fingerprint);
  } else {
    p.selection.selected = p.schema.names();
  }
  return p;
}

std::string stack_name(const std::vector<Algorithm>& bases) {
  std::string s;
  for (auto a : bases) s += (s.empty() ? "" : ", ") + std::string(algorithm_short_name(a));
  return s;
}

bool better(const EvalReport& a, const EvalReport& b) {
  return a.accuracy > b.accuracy || (a.accuracy == b.accuracy && a.f1 > b.f1);
}

}  // namespace

SelectionResult run_selection(int phase, const RunConfig& c, const Datasets& data, std::ostream* log) {
  return prepare(phase, c, data, log).selection;
}

PhaseResult run_phase(int phase, const RunConfig& c, const Datasets& data, std::ostream* log) {
  if (log) *log << "phase " << phase << ": " << phase_title(phase) << "\n";
  Prepared p = prepare(phase, c, data, log);
  const std::uint64_t seed = phase_seed(c, phase);
  const auto& y = p.data.y;

  PhaseResult r;
  r.phase = phase;
  r.title = p.data.title;
  r.positive_label = p.data.positive;
  r.rows = p.data.records.size();
  r.dropped_features = p.selection.dropped;
  r.importance = p.selection.importance;
  r.selected_features = p.selection.selected;
  r.schema = p.schema;

  // Scaling uses training rows only; one-class phases see ham only.
  const auto scale_rows = p.data.one_class ? class_rows(p.split.train, y, 0) : p.split.train;
  const ScalerParams scaler = fit_scaler(select_rows(p.X, scale_rows));
  const Matrix Xtr = apply_scaler(select_rows(p.X, p.split.train), scaler);
  const auto ytr = select<int>(y, p.split.train);
  std::vector<std::size_t> test_rows;
  {
    auto yt = select<int>(y, p.split.test);
    for (auto i : balance(yt, derive_seed(seed, 0x7e57))) test_rows.push_back(p.split.test[i]);
  }
  const Matrix Xte = apply_scaler(select_rows(p.X, test_rows), scaler);
  const auto yte = select<int>(y, test_rows);
  r.train_rows = p.split.train.size();
  r.test_rows = test_rows.size();
  if (log) *log << "  " << p.schema.size() << " features, " << r.train_rows << " training rows, " << r.test_rows
                << " balanced test rows\n";

  std::map<Algorithm, TrainedModel> fitted;
  auto evaluate = [&](const std::string& name, const ModelSpec& base, const Grid& grid) {
    ModelResult m;
    m.name = name;
    GridResult g = grid_search(base, grid, Xtr, ytr, c.cv_folds, derive_seed(seed, 0xcf));
    m.spec = g.best;
    m.cv = g.cells[g.best_index].report;
    m.cells = std::move(g.cells);
    TrainedModel model = train(m.spec, Xtr, ytr);
    m.heldout = compute_metrics(predict(model, Xte), yte);
    if (log) *log << "  " << name << ": cv accuracy " << format_percent(m.cv.accuracy) << ", held-out accuracy "
                  << format_percent(m.heldout.accuracy) << "\n";
    return std::pair{std::move(m), std::move(model)};
  };
  auto grid_for = [&](Algorithm a) {
    auto it = c.grids.find(a);
    return it == c.grids.end() ? Grid{} : resolve_grid(it->second, p.schema.size());
  };

  std::optional<std::pair<std::size_t, bool>> best;  // index, is_stack
  TrainedModel best_model;
  auto consider = [&](const EvalReport& cv, std::size_t index, bool stack, TrainedModel&& model) {
    const EvalReport* current = !best ? nullptr : best->second ? &r.stacks[best->first].cv : &r.models[best->first].cv;
    if (!current || better(cv, *current)) {
      best = {index, stack};
      best_model = std::move(model);
    }
  };

  if (p.data.one_class) {
    auto [m, model] = evaluate(std::string(algorithm_display_name(Algorithm::OneClassSVM)),
                               default_spec(Algorithm::OneClassSVM, seed), grid_for(Algorithm::OneClassSVM));
    r.models.push_back(std::move(m));
    consider(r.models.back().cv, 0, false, std::move(model));
  } else {
    for (auto a : c.binary_algorithms) {
      if (a == Algorithm::Stack || a == Algorithm::OneClassSVM)
        throw InvalidArgument("config: binary_algorithms may not list " + std::string(algorithm_name(a)));
      auto [m, model] = evaluate(std::string(algorithm_display_name(a)), default_spec(a, seed), grid_for(a));
      r.models.push_back(std::move(m));
      fitted.emplace(a, model);
      consider(r.models.back().cv, r.models.size() - 1, false, std::move(model));
    }
    for (const auto& bases : c.stacks) {
      ModelSpec spec = default_spec(Algorithm::Stack, derive_seed(seed, fnv1a64(stack_name(bases))));
      for (auto a : bases) {
        auto it = std::find(c.binary_algorithms.begin(), c.binary_algorithms.end(), a);
        if (it != c.binary_algorithms.end())
          spec.base_specs.push_back(r.models[static_cast<std::size_t>(it - c.binary_algorithms.begin())].spec);
        else
          spec.base_specs.push_back(default_spec(a, seed));
      }
      auto [m, model] = evaluate(stack_name(bases), spec, Grid{});
      r.stacks.push_back(std::move(m));
      consider(r.stacks.back().cv, r.stacks.size() - 1, true, std::move(model));
    }
  }

  r.best_name = best->second ? "Stack(" + r.stacks[best->first].name + ")" : r.models[best->first].name;
  r.bundle = ModelBundle{best_model, p.schema, scaler, p.data.positive};
  {
    std::vector<double> s;
    for (const auto& sc : predict(best_model, Xte)) s.push_back(sc.anomaly_score());
    r.roc = roc_curve(s, yte);
  }

  const std::string stem = "phase" + std::to_string(phase);
  if (p.data.one_class) {
    std::vector<NamedReport> col{{phase == 3 ? "Ham and Spam" : "Ham and Phishing", r.models[0].heldout}};
    r.tables.emplace_back(stem + "_oneclass", render_table(col, TableStyle::OneClass, r.title));
  } else {
    std::vector<NamedReport> rows, stacks;
    for (const auto& m : r.models) rows.emplace_back(m.name, m.heldout);
    for (const auto& m : r.stacks) stacks.emplace_back(m.name, m.heldout);
    r.tables.emplace_back(stem + "_binary", render_table(rows, TableStyle::Binary, r.title));
    if (!stacks.empty())
      r.tables.emplace_back(stem + "_stacking",
                            render_table(stacks, TableStyle::Stacking, r.title + ", stacked with a LogReg meta-learner"));
  }
  return r;
}

// ---------------------------------------------------------------- manifest

json report_to_json(const EvalReport& e) {
  json j = {{"accuracy", e.accuracy}, {"precision", e.precision}, {"recall", e.recall}, {"f1", e.f1},
            {"auc", e.auc ? json(*e.auc) : json(nullptr)}, {"tp", e.tp}, {"fp", e.fp}, {"fn", e.fn}, {"tn", e.tn}};
  if (!e.per_fold.empty()) {
    json folds = json::array();
    for (const auto& f : e.per_fold) folds.push_back(report_to_json(f));
    j["per_fold"] = folds;
  }
  return j;
}

json importance_to_json(const ImportanceReport& r) {
  json features = json::array();
  for (auto i : r.ranking()) {
    const auto& f = r.features[i];
    features.push_back({{"name", f.name}, {"mean_drop", f.mean_drop}, {"stddev", f.stddev}, {"repeats", f.repeats}});
  }
  return {{"baseline_accuracy", r.baseline_accuracy}, {"features", features}};
}

namespace {

json hyper_json(const ModelSpec& s) {
  json hp = json::object();
  for (const auto& [k, v] : default_hyperparameters(s.algorithm)) hp[k] = s.get(k);
  return hp;
}

json model_result_json(const ModelResult& m) {
  json cells = json::array();
  for (const auto& c : m.cells) {
    json cv = report_to_json(c.report);
    cv.erase("per_fold");
    cells.push_back({{"hyperparameters", hyper_json(c.spec)}, {"cv", cv}});
  }
  json j = {{"name", m.name},
            {"algorithm", std::string(algorithm_name(m.spec.algorithm))},
            {"seed", hex64(m.spec.seed)},
            {"hyperparameters", hyper_json(m.spec)},
            {"cv", report_to_json(m.cv)},
            {"heldout", report_to_json(m.heldout)},
            {"grid", cells}};
  if (!m.spec.base_specs.empty()) {
    json bases = json::array();
    for (const auto& b : m.spec.base_specs)
      bases.push_back({{"algorithm", std::string(algorithm_name(b.algorithm))}, {"hyperparameters", hyper_json(b)}});
    j["base_learners"] = bases;
  }
  return j;
}

json dataset_json(const Corpus& c) {
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& r : c.records) ++counts[static_cast<int>(r.label)];
  return {{"count", c.records.size()},
          {"ham", counts[0]},
          {"spam", counts[1]},
          {"phishing", counts[2]},
          {"skipped", c.report.skipped},
          {"digest", hex64(corpus_digest(c.records))}};
}

void write_file(const fs::path& path, const std::string& text, std::vector<fs::path>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
  files.push_back(path);
}

std::string timestamp_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::uint64_t manifest_digest(const json& manifest) {
  json copy = manifest;
  copy.erase("timestamp");
  copy.erase("manifest_digest");
  return fnv1a64(copy.dump());
}

RunOutput run_pipeline(const RunConfig& c, std::span<const int> phases, std::ostream* log) {
  for (int ph : phases) phase_title(ph);
  fs::create_directories(c.output_dir);
  Datasets data = load_datasets(c, log);
  RunOutput out;
  json manifest = {{"tool", "emailad"}, {"version", kToolVersion}, {"timestamp", timestamp_now()},
                   {"config", config_to_json(c)}};
  manifest["datasets"]["A"] = dataset_json(data.a);
  if (data.b) manifest["datasets"]["B"] = dataset_json(*data.b);
  manifest["phases"] = json::array();

  auto flush_manifest = [&] {
    manifest["manifest_digest"] = hex64(manifest_digest(manifest));
    std::vector<fs::path> ignored;
    write_file(c.output_dir / "manifest.json", manifest.dump(1) + "\n", ignored);
  };

  for (int ph : phases) {
    PhaseResult r = run_phase(ph, c, data, log);
    const std::string stem = "phase" + std::to_string(ph);
    json tables = json::array();
    for (const auto& [name, t] : r.tables) {
      write_file(c.output_dir / (name + ".txt"), t.text, out.files);
      write_file(c.output_dir / (name + ".csv"), t.csv, out.files);
      tables.push_back(name);
      if (log) *log << "\n" << t.text << "\n";
    }
    const std::string bundle = bundle_text(r.bundle);
    write_file(c.output_dir / (stem + ".model.json"), bundle, out.files);
    {
      std::ostringstream roc;
      char buf[80];
      roc << "fpr,tpr\n";
      for (const auto& pt : r.roc) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pt.fpr, pt.tpr);
        roc << buf;
      }
      write_file(c.output_dir / (stem + "_roc.csv"), roc.str(), out.files);
    }
    if (r.importance) {
      std::ostringstream csv;
      csv << "rank,feature,mean_drop,stddev,repeats\n";
      std::size_t rank = 0;
      char buf[64];
      for (auto i : r.importance->ranking()) {
        const auto& f = r.importance->features[i];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", f.mean_drop, f.stddev);
        csv << ++rank << ',' << f.name << ',' << buf << ',' << f.repeats << '\n';
      }
      write_file(c.output_dir / (stem + "_importance.csv"), csv.str(), out.files);
    }

    json pj = {{"phase", ph},
               {"title", r.title},
               {"positive_label", r.positive_label},
               {"rows", r.rows},
               {"train_rows", r.train_rows},
               {"test_rows", r.test_rows},
               {"schema_fingerprint", hex64(r.schema.fingerprint)},
               {"features", r.schema.names()},
               {"dropped_features", r.dropped_features},
               {"selected_features", r.selected_features},
               {"best_model", r.best_name},
               {"model_file", stem + ".model.json"},
               {"model_digest", hex64(fnv1a64(bundle))},
               {"tables", tables}};
    if (r.importance) pj["importance"] = importance_to_json(*r.importance);
    json models = json::array(), stacks = json::array();
    for (const auto& m : r.models) models.push_back(model_result_json(m));
    for (const auto& m : r.stacks) stacks.push_back(model_result_json(m));
    pj["models"] = models;
    pj["stacks"] = stacks;
    manifest["phases"].push_back(pj);
    flush_manifest();
    out.phases.push_back(std::move(r));
  }
  if (phases.empty()) flush_manifest();
  out.files.push_back(c.output_dir / "manifest.json");
  manifest["manifest_digest"] = hex64(manifest_digest(manifest));
  out.manifest = std::move(manifest);
  return out;
}

}  // namespace emailad
