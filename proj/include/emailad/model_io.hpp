#pragma once

#include <string>

#include "emailad/learners.hpp"
#include "json.hpp"

namespace emailad {

inline constexpr int kModelFormatVersion = 1;

// Envelope: format_version, algorithm, schema_fingerprint, hyperparameters,
// seed, parameters, convergence_flag. Float arrays are base64 little-endian
// float64 so a round trip is bit-exact.
nlohmann::json model_to_json(const TrainedModel& model);
// Throws FormatError on anything malformed or from another format version.
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace emailad
