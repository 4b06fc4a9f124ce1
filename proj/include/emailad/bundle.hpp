#pragma once

#include <filesystem>
#include <string>

#include "emailad/features.hpp"
#include "emailad/learners.hpp"
#include "json.hpp"

namespace emailad {

nlohmann::json schema_to_json(const FeatureSchema& schema);
// Throws FingerprintMismatch when the stored fingerprint does not match the
// recomputed one.
FeatureSchema schema_from_json(const nlohmann::json& j);

nlohmann::json scaler_to_json(const ScalerParams& scaler);
ScalerParams scaler_from_json(const nlohmann::json& j);

// Everything classify needs: the model, the schema it was trained against,
// the training scaler and the name of the positive class.
struct ModelBundle {
  TrainedModel model;
  FeatureSchema schema;
  ScalerParams scaler;
  std::string positive_label = "spam";

  bool operator==(const ModelBundle&) const = default;
};

inline constexpr int kBundleVersion = 1;

nlohmann::json bundle_to_json(const ModelBundle& bundle);
// Verifies that model, scaler and schema agree on one fingerprint.
ModelBundle bundle_from_json(const nlohmann::json& j);

// Written as dump(1) plus a trailing newline so identical bundles are
// identical files.
std::string bundle_text(const ModelBundle& bundle);
void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_bundle(const std::filesystem::path& path);

// FNV-1a of the serialized model envelope.
std::uint64_t model_fingerprint(const ModelBundle& bundle);

struct Verdict {
  std::string label;  // ham / <positive_label>, or inlier / outlier
  Score score;
  int exit_code = 0;  // 0 ham or inlier, 10 anomalous
};

Verdict classify_header(const ModelBundle& bundle, const EmailHeader& header);
// "<label>\t<decision_value>\t<model fingerprint>"
std::string verdict_line(const ModelBundle& bundle, const Verdict& verdict);

}  // namespace emailad
