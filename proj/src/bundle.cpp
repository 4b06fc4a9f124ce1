#include "emailad/bundle.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "emailad/error.hpp"
#include "emailad/model_io.hpp"
#include "emailad/util.hpp"

namespace emailad {

using nlohmann::json;

json schema_to_json(const FeatureSchema& s) {
  json descriptors = json::array();
  for (const auto& d : s.descriptors)
    descriptors.push_back({{"name", d.name},
                           {"category", static_cast<int>(d.category)},
                           {"encoding",
                            {{"kind", static_cast<int>(d.encoding.kind)},
                             {"group", d.encoding.group},
                             {"arity", d.encoding.arity},
                             {"level", d.encoding.level}}},
                           {"missing_code", pack_f64(std::span<const double>(&d.missing_code, 1))},
                           {"kind", static_cast<int>(d.kind)},
                           {"argument", d.argument}});
  return {{"descriptors", descriptors},
          {"mode_timezone", s.mode_timezone},
          {"mode_msgid_domain", s.mode_msgid_domain},
          {"top_fields", s.top_fields},
          {"feature_set", static_cast<int>(s.feature_set)},
          {"one_hot", s.options.one_hot},
          {"chain_transpose", s.options.chain_transpose},
          {"fingerprint", hex64(s.fingerprint)}};
}

FeatureSchema schema_from_json(const json& j) {
  FeatureSchema s;
  try {
    for (const auto& d : j.at("descriptors")) {
      FeatureDescriptor fd;
      fd.name = d.at("name").get<std::string>();
      fd.category = static_cast<FeatureCategory>(d.at("category").get<int>());
      const auto& e = d.at("encoding");
      fd.encoding = {static_cast<EncodingKind>(e.at("kind").get<int>()), e.at("group").get<int>(),
                     e.at("arity").get<int>(), e.at("level").get<int>()};
      auto mc = unpack_f64(d.at("missing_code").get<std::string>());
      if (mc.size() != 1) throw FormatError("schema: bad missing_code");
      fd.missing_code = mc[0];
      fd.kind = static_cast<FeatureKind>(d.at("kind").get<int>());
      fd.argument = d.at("argument").get<std::string>();
      s.descriptors.push_back(std::move(fd));
    }
    s.mode_timezone = j.at("mode_timezone").get<std::string>();
    s.mode_msgid_domain = j.at("mode_msgid_domain").get<std::string>();
    s.top_fields = j.at("top_fields").get<std::vector<std::string>>();
    s.feature_set = static_cast<FeatureSet>(j.at("feature_set").get<int>());
    s.options.one_hot = j.at("one_hot").get<bool>();
    s.options.chain_transpose = j.at("chain_transpose").get<bool>();
    s.fingerprint = parse_hex64(j.at("fingerprint").get<std::string>());
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("schema: ") + e.what());
  }
  if (compute_fingerprint(s) != s.fingerprint)
    throw FingerprintMismatch("schema fingerprint " + hex64(s.fingerprint) + " does not match its contents (" +
                              hex64(compute_fingerprint(s)) + ")");
  return s;
}

json scaler_to_json(const ScalerParams& p) {
  return {{"mean", pack_f64(p.mean)}, {"stddev", pack_f64(p.stddev)}, {"schema_fingerprint", hex64(p.schema_fingerprint)}};
}

ScalerParams scaler_from_json(const json& j) {
  try {
    ScalerParams p;
    p.mean = unpack_f64(j.at("mean").get<std::string>());
    p.stddev = unpack_f64(j.at("stddev").get<std::string>());
    p.schema_fingerprint = parse_hex64(j.at("schema_fingerprint").get<std::string>());
    if (p.mean.size() != p.stddev.size()) throw FormatError("scaler: mean/stddev length mismatch");
    return p;
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("scaler: ") + e.what());
  }
}

json bundle_to_json(const ModelBundle& b) {
  return {{"bundle_version", kBundleVersion},
          {"positive_label", b.positive_label},
          {"schema", schema_to_json(b.schema)},
          {"scaler", scaler_to_json(b.scaler)},
          {"model", model_to_json(b.model)}};
}

ModelBundle bundle_from_json(const json& j) {
  if (!j.is_object() || !j.contains("bundle_version")) throw FormatError("bundle: not a model bundle");
  if (j.at("bundle_version") != kBundleVersion)
    throw FormatError("bundle: unsupported bundle_version " + j.at("bundle_version").dump());
  ModelBundle b;
  try {
    b.positive_label = j.at("positive_label").get<std::string>();
    b.schema = schema_from_json(j.at("schema"));
    b.scaler = scaler_from_json(j.at("scaler"));
    b.model = model_from_json(j.at("model"));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(std::string("bundle: ") + e.what());
  }
  if (b.model.schema_fingerprint != b.schema.fingerprint)
    throw FingerprintMismatch("bundle: model schema " + hex64(b.model.schema_fingerprint) +
                              " does not match embedded schema " + hex64(b.schema.fingerprint));
  if (b.scaler.schema_fingerprint != b.schema.fingerprint || b.scaler.mean.size() != b.schema.size())
    throw FingerprintMismatch("bundle: scaler does not match embedded schema");
  return b;
}

std::string bundle_text(const ModelBundle& bundle) { return bundle_to_json(bundle).dump(1) + "\n"; }

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << bundle_text(bundle);
  if (!out) throw IoError("failed writing " + path.string());
}

ModelBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw FormatError("model file " + path.string() + " is not valid JSON");
  return bundle_from_json(j);
}

std::uint64_t model_fingerprint(const ModelBundle& bundle) { return fnv1a64(model_to_json(bundle.model).dump()); }

Verdict classify_header(const ModelBundle& bundle, const EmailHeader& header) {
  FeatureVector v = apply_scaler(extract(header, bundle.schema), bundle.scaler);
  Verdict out;
  out.score = predict(bundle.model, v);
  if (out.score.one_class) out.label = out.score.anomalous ? "outlier" : "inlier";
  else out.label = out.score.anomalous ? bundle.positive_label : "ham";
  out.exit_code = out.score.anomalous ? 10 : 0;
  return out;
}

std::string verdict_line(const ModelBundle& bundle, const Verdict& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v.score.decision_value);
  return v.label + "\t" + buf + "\t" + hex64(model_fingerprint(bundle));
}

}  // namespace emailad
