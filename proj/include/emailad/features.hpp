#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emailad/corpus.hpp"
#include "emailad/matrix.hpp"

namespace emailad {

enum class FeatureCategory { MissingField, Counting, HeaderValue, Comparison };

enum class EncodingKind { Binary01, Ordinal, OneHotGroup };

struct Encoding {
  EncodingKind kind = EncodingKind::Binary01;
  int group = -1;  // OneHotGroup only
  int arity = 0;   // OneHotGroup only
  int level = -1;  // ordinal level this indicator column stands for

  bool operator==(const Encoding&) const = default;
};

// What a descriptor computes. `argument` carries the field name for
// Missing and the pair id for DomainMatch.
enum class FeatureKind {
  Missing,
  HopCount,
  ToCount,
  CcCount,
  RecipientCount,
  FieldCount,
  DistinctFieldCount,
  TimezoneMismatch,
  ContentTypeHtml,
  MsgidDomainMismatch,
  DateParses,
  DomainMatch,
  ReceivedChain,
};

struct FeatureDescriptor {
  std::string name;
  FeatureCategory category = FeatureCategory::MissingField;
  Encoding encoding;
  double missing_code = 0.0;
  FeatureKind kind = FeatureKind::Missing;
  std::string argument;

  bool operator==(const FeatureDescriptor&) const = default;
};

enum class FeatureSet { Full, DomainMatchOnly };

struct SchemaOptions {
  bool one_hot = false;          // expand ternary ordinal features into indicator groups
  bool chain_transpose = false;  // compare hop i 'from' with hop i+1 'by' instead

  bool operator==(const SchemaOptions&) const = default;
};

// Ordinal codes shared by the comparison features.
inline constexpr double kDomainMismatch = 0.0;
inline constexpr double kDomainMatch = 1.0;
inline constexpr double kOperandMissing = 2.0;

struct FeatureSchema {
  std::vector<FeatureDescriptor> descriptors;
  std::string mode_timezone;
  std::string mode_msgid_domain;
  std::vector<std::string> top_fields;
  FeatureSet feature_set = FeatureSet::Full;
  SchemaOptions options;
  std::uint64_t fingerprint = 0;

  std::size_t size() const noexcept { return descriptors.size(); }
  std::vector<std::string> names() const;

  // Narrowed copies with a recomputed fingerprint.
  FeatureSchema subset(std::span<const std::size_t> keep) const;
  FeatureSchema select(std::span<const std::string> names) const;

  bool operator==(const FeatureSchema&) const = default;
};

std::uint64_t compute_fingerprint(const FeatureSchema& schema);

// Record order does not affect the result.
FeatureSchema fit_schema(std::span<const CorpusRecord> records, std::size_t k, FeatureSet feature_set,
                         SchemaOptions options = {});

struct FeatureVector {
  std::vector<double> values;
  std::uint64_t schema_fingerprint = 0;
};

FeatureVector extract(const EmailHeader& header, const FeatureSchema& schema);
inline FeatureVector extract(const CorpusRecord& record, const FeatureSchema& schema) {
  return extract(record.header, schema);
}

Matrix extract_matrix(std::span<const CorpusRecord> records, const FeatureSchema& schema);

// Throws FingerprintMismatch when the vectors disagree about their schema.
Matrix stack_vectors(std::span<const FeatureVector> vectors);

// Received-chain consistency over parsed hops in header order.
double received_chain_value(std::span<const ReceivedHop> hops, bool transpose);

struct ScalerParams {
  std::vector<double> mean;
  std::vector<double> stddev;  // zero replaced by one
  std::uint64_t schema_fingerprint = 0;

  bool operator==(const ScalerParams&) const = default;
};

ScalerParams fit_scaler(const Matrix& matrix);
FeatureVector apply_scaler(const FeatureVector& vector, const ScalerParams& params);
Matrix apply_scaler(const Matrix& matrix, const ScalerParams& params);

// Columns worth keeping for training: drops single-valued columns and
// columns that are a one-to-one relabeling of an earlier kept column. Each
// dropped column is reported to diag.
std::vector<std::size_t> informative_columns(const Matrix& matrix, std::span<const std::string> names,
                                             std::ostream* diag = nullptr);

std::vector<int> binary_targets(std::span<const CorpusRecord> records);  // ham=0, otherwise 1

void write_feature_csv(std::ostream& out, const Matrix& matrix, std::span<const std::string> names,
                       std::span<const int> labels);

std::string_view category_name(FeatureCategory c);

}  // namespace emailad
