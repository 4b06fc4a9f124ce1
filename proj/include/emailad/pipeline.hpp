#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emailad/bundle.hpp"
#include "emailad/corpus.hpp"
#include "emailad/eval.hpp"
#include "emailad/importance.hpp"
#include "emailad/learners.hpp"
#include "emailad/report.hpp"
#include "json.hpp"

namespace emailad {

inline constexpr const char* kToolVersion = "0.1.0";

// Grid values as written in the config: a number, "inf" (unbounded depth,
// stored as 0) or "1/d" (resolved against the feature count of the phase).
using GridTokens = std::map<std::string, std::vector<std::string>>;

struct RunConfig {
  std::filesystem::path trec_index;
  std::filesystem::path trec_root;
  std::filesystem::path phishing_dir;  // empty: phases 2 and 4 unavailable

  std::size_t k = 50;
  bool one_hot = false;
  bool chain_transpose = false;

  std::size_t importance_repeats = 10;
  std::size_t top_m = 30;
  double validation_fraction = 0.25;
  std::vector<Algorithm> importance_models{Algorithm::RandomForest, Algorithm::LinearSVM, Algorithm::MLP};

  std::size_t cv_folds = 10;
  double test_fraction = 0.2;

  std::vector<Algorithm> binary_algorithms;
  std::map<Algorithm, GridTokens> grids;
  std::vector<std::vector<Algorithm>> stacks;

  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
};

RunConfig default_config();
// Relative paths resolve against base_dir. Unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

Grid resolve_grid(const GridTokens& tokens, std::size_t feature_count);

struct Datasets {
  Corpus a;                // ham + spam
  std::optional<Corpus> b;  // phishing
};

// Throws IoError when a configured dataset cannot be read at all.
Datasets load_datasets(const RunConfig& config, std::ostream* diag);

struct ModelResult {
  std::string name;  // row label in the tables
  ModelSpec spec;    // grid winner
  EvalReport cv;
  EvalReport heldout;
  std::vector<GridCell> cells;
};

struct PhaseResult {
  int phase = 0;
  std::string title;
  std::string positive_label;
  std::size_t rows = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;  // balanced held-out set
  std::vector<std::string> dropped_features;
  std::optional<ImportanceReport> importance;
  std::vector<std::string> selected_features;
  FeatureSchema schema;
  std::vector<ModelResult> models;
  std::vector<ModelResult> stacks;
  std::string best_name;
  ModelBundle bundle;
  std::vector<RocPoint> roc;  // best model on the held-out set
  std::vector<std::pair<std::string, RenderedTable>> tables;  // file stem -> table
};

// Feature selection only (phases 1 and 3 rank with permutation importance).
struct SelectionResult {
  FeatureSchema schema;  // informative columns
  std::vector<std::string> dropped;
  std::optional<ImportanceReport> importance;
  std::vector<std::string> selected;
};

SelectionResult run_selection(int phase, const RunConfig& config, const Datasets& data, std::ostream* log);
PhaseResult run_phase(int phase, const RunConfig& config, const Datasets& data, std::ostream* log);

struct RunOutput {
  std::vector<PhaseResult> phases;
  nlohmann::json manifest;
  std::vector<std::filesystem::path> files;
};

// Runs the phases, writes tables, model bundles and manifest.json under
// config.output_dir. Outputs of completed phases stay on disk when a later
// phase throws.
RunOutput run_pipeline(const RunConfig& config, std::span<const int> phases, std::ostream* log);

// FNV-1a over the manifest with timestamp and manifest_digest removed.
std::uint64_t manifest_digest(const nlohmann::json& manifest);

// One row per email: id, label, then one column per field holding every
// occurrence's unfolded value joined by newlines (empty when absent).
void write_header_cache(std::ostream& out, std::span<const CorpusRecord> records, std::span<const std::string> fields);

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json importance_to_json(const ImportanceReport& report);

}  // namespace emailad
