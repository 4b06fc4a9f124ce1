#include "emailad/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <unordered_map>

#include "emailad/error.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace {

struct PairDef {
  std::string_view id;
  std::string_view left;
  std::string_view right;  // "received" means the first hop's from-domain
};

constexpr PairDef kPairs[] = {
    {"from~message-id", "from", "message-id"},
    {"from~return-path", "from", "return-path"},
    {"from~reply-to", "from", "reply-to"},
    {"from~received", "from", "received"},
    {"return-path~message-id", "return-path", "message-id"},
};

// Everything extraction needs, parsed once per email.
struct EmailFacts {
  const EmailHeader* header;
  std::vector<ReceivedHop> hops;
  std::optional<DateStamp> date;
  std::map<std::string_view, std::optional<std::string>> domains;
};

std::optional<std::string> field_domain(const EmailHeader& h, std::string_view name) {
  const auto* f = h.find(name);
  if (!f) return std::nullopt;
  return extract_domain(*f);
}

EmailFacts collect_facts(const EmailHeader& h) {
  EmailFacts facts;
  facts.header = &h;
  for (const auto* f : h.find_all("received")) facts.hops.push_back(parse_received(f->raw_value));
  if (const auto* d = h.find("date")) facts.date = parse_date(d->raw_value);
  for (auto name : {"from", "message-id", "return-path", "reply-to"})
    facts.domains[name] = field_domain(h, name);
  if (!facts.hops.empty()) facts.domains["received"] = facts.hops.front().from_domain;
  else facts.domains["received"] = std::nullopt;
  return facts;
}

std::size_t address_count(const EmailHeader& h, std::string_view name) {
  std::size_t n = 0;
  for (const auto* f : h.find_all(name)) n += parse_address_list(f->raw_value).size();
  return n;
}

const PairDef& pair_by_id(std::string_view id) {
  for (const auto& p : kPairs)
    if (p.id == id) return p;
  throw FormatError("unknown domain pair '" + std::string(id) + "'");
}

double domain_match(const EmailFacts& facts, std::string_view pair_id) {
  const auto& pair = pair_by_id(pair_id);
  const auto& a = facts.domains.at(pair.left);
  const auto& b = facts.domains.at(pair.right);
  if (!a || !b) return kOperandMissing;
  return *a == *b ? kDomainMatch : kDomainMismatch;
}

// Ordinal value of a descriptor before any one-hot expansion.
double ordinal_value(const FeatureDescriptor& d, const EmailFacts& facts, const FeatureSchema& schema) {
  const EmailHeader& h = *facts.header;
  switch (d.kind) {
    case FeatureKind::Missing:
      return h.has(d.argument) ? 0.0 : 1.0;
    case FeatureKind::HopCount:
      return static_cast<double>(facts.hops.size());
    case FeatureKind::ToCount:
      return static_cast<double>(address_count(h, "to"));
    case FeatureKind::CcCount:
      return static_cast<double>(address_count(h, "cc"));
    case FeatureKind::RecipientCount:
      return static_cast<double>(address_count(h, "to") + address_count(h, "cc") + address_count(h, "from"));
    case FeatureKind::FieldCount:
      return static_cast<double>(h.fields.size());
    case FeatureKind::DistinctFieldCount: {
      std::set<std::string_view> names;
      for (const auto& f : h.fields) names.insert(f.name);
      return static_cast<double>(names.size());
    }
    case FeatureKind::TimezoneMismatch:
      return (facts.date && facts.date->zone_token == schema.mode_timezone) ? 0.0 : 1.0;
    case FeatureKind::ContentTypeHtml: {
      const auto* ct = h.find("content-type");
      if (!ct) return d.missing_code;
      return istarts_with(trim_space(ct->raw_value), "text/html") ? 1.0 : 0.0;
    }
    case FeatureKind::MsgidDomainMismatch: {
      const auto& dom = facts.domains.at("message-id");
      if (!dom) return d.missing_code;
      return *dom == schema.mode_msgid_domain ? 0.0 : 1.0;
    }
    case FeatureKind::DateParses:
      return facts.date ? 1.0 : 0.0;
    case FeatureKind::DomainMatch:
      return domain_match(facts, d.argument);
    case FeatureKind::ReceivedChain:
      return received_chain_value(facts.hops, schema.options.chain_transpose);
  }
  return 0.0;
}

double descriptor_value(const FeatureDescriptor& d, const EmailFacts& facts, const FeatureSchema& schema) {
  double v = ordinal_value(d, facts, schema);
  if (d.encoding.kind == EncodingKind::OneHotGroup) return v == d.encoding.level ? 1.0 : 0.0;
  return v;
}

template <typename Key>
std::string mode_of(const std::map<Key, std::size_t>& counts) {
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [k, n] : counts) {  // map order gives the lexicographic tie rule
    if (n > best_count) {
      best = k;
      best_count = n;
    }
  }
  return best;
}

void add(std::vector<FeatureDescriptor>& out, const SchemaOptions& opt, int& group, std::string name,
         FeatureCategory cat, EncodingKind enc, double missing_code, FeatureKind kind, std::string arg = {}) {
  bool ternary = enc == EncodingKind::Ordinal && missing_code == kOperandMissing;
  if (opt.one_hot && ternary) {
    for (int level = 0; level < 3; ++level) {
      FeatureDescriptor d{name + "=" + std::to_string(level), cat, {EncodingKind::OneHotGroup, group, 3, level},
                          missing_code, kind, arg};
      out.push_back(std::move(d));
    }
    ++group;
    return;
  }
  out.push_back({std::move(name), cat, {enc, -1, 0, -1}, missing_code, kind, std::move(arg)});
}

std::string_view encoding_name(EncodingKind e) {
  switch (e) {
    case EncodingKind::Binary01: return "binary01";
    case EncodingKind::Ordinal: return "ordinal";
    case EncodingKind::OneHotGroup: return "one_hot_group";
  }
  return "";
}

}  // namespace

std::string_view category_name(FeatureCategory c) {
  switch (c) {
    case FeatureCategory::MissingField: return "missing_field";
    case FeatureCategory::Counting: return "counting";
    case FeatureCategory::HeaderValue: return "header_value";
    case FeatureCategory::Comparison: return "comparison";
  }
  return "";
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(descriptors.size());
  for (const auto& d : descriptors) out.push_back(d.name);
  return out;
}

FeatureSchema FeatureSchema::subset(std::span<const std::size_t> keep) const {
  FeatureSchema out = *this;
  out.descriptors.clear();
  for (auto i : keep) {
    if (i >= descriptors.size()) throw InvalidArgument("schema subset index out of range");
    out.descriptors.push_back(descriptors[i]);
  }
  out.fingerprint = compute_fingerprint(out);
  return out;
}

FeatureSchema FeatureSchema::select(std::span<const std::string> wanted) const {
  std::vector<std::size_t> keep;
  for (const auto& name : wanted) {
    auto it = std::find_if(descriptors.begin(), descriptors.end(), [&](const auto& d) { return d.name == name; });
    if (it == descriptors.end()) throw InvalidArgument("schema has no feature '" + name + "'");
    keep.push_back(static_cast<std::size_t>(it - descriptors.begin()));
  }
  return subset(keep);
}

std::uint64_t compute_fingerprint(const FeatureSchema& s) {
  Fnv1a64 h;
  h.update("emailad-schema-v1\x1f");
  h.update(s.feature_set == FeatureSet::Full ? "full" : "domain_match_only").update("\x1f");
  h.update_u64(s.options.one_hot).update_u64(s.options.chain_transpose);
  h.update(s.mode_timezone).update("\x1f").update(s.mode_msgid_domain).update("\x1f");
  h.update_u64(s.top_fields.size());
  for (const auto& f : s.top_fields) h.update(f).update("\x1f");
  h.update_u64(s.descriptors.size());
  for (const auto& d : s.descriptors) {
    h.update(d.name).update("\x1f").update(category_name(d.category)).update("\x1f");
    h.update(encoding_name(d.encoding.kind));
    h.update_u64(static_cast<std::uint64_t>(d.encoding.group + 1))
        .update_u64(static_cast<std::uint64_t>(d.encoding.arity))
        .update_u64(static_cast<std::uint64_t>(d.encoding.level + 1));
    h.update_f64(d.missing_code).update_u64(static_cast<std::uint64_t>(d.kind));
    h.update(d.argument).update("\x1f");
  }
  return h.digest();
}

FeatureSchema fit_schema(std::span<const CorpusRecord> records, std::size_t k, FeatureSet feature_set,
                         SchemaOptions options) {
  if (records.empty()) throw InvalidArgument("fit_schema: empty record list");
  FeatureSchema schema;
  schema.feature_set = feature_set;
  schema.options = options;

  std::map<std::string, std::size_t> zones;
  std::map<std::string, std::size_t> msgid_domains;
  for (const auto& r : records) {
    if (const auto* d = r.header.find("date"))
      if (auto stamp = parse_date(d->raw_value)) ++zones[stamp->zone_token];
    if (auto dom = field_domain(r.header, "message-id")) ++msgid_domains[*dom];
  }
  schema.mode_timezone = mode_of(zones);
  schema.mode_msgid_domain = mode_of(msgid_domains);

  auto& out = schema.descriptors;
  int group = 0;
  using C = FeatureCategory;
  using E = EncodingKind;
  using K = FeatureKind;
  if (feature_set == FeatureSet::Full) {
    if (k == 0) throw InvalidArgument("fit_schema: k must be >= 1");
    schema.top_fields = top_k_fields(header_frequencies(records), k);
    for (const auto& f : schema.top_fields) add(out, options, group, "missing:" + f, C::MissingField, E::Binary01, 1.0, K::Missing, f);
    add(out, options, group, "hop_count", C::Counting, E::Ordinal, 0.0, K::HopCount);
    add(out, options, group, "to_count", C::Counting, E::Ordinal, 0.0, K::ToCount);
    add(out, options, group, "cc_count", C::Counting, E::Ordinal, 0.0, K::CcCount);
    add(out, options, group, "recipient_count", C::Counting, E::Ordinal, 0.0, K::RecipientCount);
    add(out, options, group, "header_field_count", C::Counting, E::Ordinal, 0.0, K::FieldCount);
    add(out, options, group, "distinct_header_count", C::Counting, E::Ordinal, 0.0, K::DistinctFieldCount);
    add(out, options, group, "timezone_mismatch", C::HeaderValue, E::Binary01, 1.0, K::TimezoneMismatch);
    add(out, options, group, "content_type_html", C::HeaderValue, E::Ordinal, kOperandMissing, K::ContentTypeHtml);
    add(out, options, group, "msgid_domain_mismatch", C::HeaderValue, E::Ordinal, kOperandMissing, K::MsgidDomainMismatch);
    add(out, options, group, "date_parses", C::HeaderValue, E::Binary01, 0.0, K::DateParses);
  }
  for (const auto& p : kPairs)
    add(out, options, group, "domain_match:" + std::string(p.id), C::Comparison, E::Ordinal, kOperandMissing,
        K::DomainMatch, std::string(p.id));
  add(out, options, group, "received_chain_consistent", C::Comparison, E::Binary01, 1.0, K::ReceivedChain);

  schema.fingerprint = compute_fingerprint(schema);
  return schema;
}

double received_chain_value(std::span<const ReceivedHop> hops, bool transpose) {
  for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
    const auto& a = transpose ? hops[i].from_domain : hops[i].by_domain;
    const auto& b = transpose ? hops[i + 1].by_domain : hops[i + 1].from_domain;
    if (!a || !b) continue;
    if (*a != *b) return 0.0;
  }
  return 1.0;
}

FeatureVector extract(const EmailHeader& header, const FeatureSchema& schema) {
  if (compute_fingerprint(schema) != schema.fingerprint)
    throw FingerprintMismatch("schema content does not match its fingerprint");
  auto facts = collect_facts(header);
  FeatureVector v;
  v.schema_fingerprint = schema.fingerprint;
  v.values.reserve(schema.size());
  for (const auto& d : schema.descriptors) v.values.push_back(descriptor_value(d, facts, schema));
  return v;
}

Matrix extract_matrix(std::span<const CorpusRecord> records, const FeatureSchema& schema) {
  std::vector<FeatureVector> vectors(records.size());
  parallel_for(records.size(), [&](std::size_t i) { vectors[i] = extract(records[i], schema); });
  if (vectors.empty()) {
    Matrix m(0, schema.size());
    m.schema_fingerprint = schema.fingerprint;
    return m;
  }
  return stack_vectors(vectors);
}

Matrix stack_vectors(std::span<const FeatureVector> vectors) {
  if (vectors.empty()) return {};
  Matrix m(0, 0);
  auto fp = vectors.front().schema_fingerprint;
  for (const auto& v : vectors) {
    if (v.schema_fingerprint != fp) throw FingerprintMismatch("feature vectors from different schemas in one batch");
    m.append_row(v.values);
  }
  m.schema_fingerprint = fp;
  return m;
}

ScalerParams fit_scaler(const Matrix& m) {
  if (m.empty()) throw InvalidArgument("fit_scaler: empty matrix");
  ScalerParams p;
  p.schema_fingerprint = m.schema_fingerprint;
  p.mean.assign(m.cols(), 0.0);
  p.stddev.assign(m.cols(), 0.0);
  const double n = static_cast<double>(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
    double mean = s / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double d = m(r, c) - mean;
      ss += d * d;
    }
    double sd = std::sqrt(ss / n);
    p.mean[c] = mean;
    p.stddev[c] = sd > 0.0 ? sd : 1.0;
  }
  return p;
}

FeatureVector apply_scaler(const FeatureVector& v, const ScalerParams& p) {
  if (v.values.size() != p.mean.size()) throw InvalidArgument("apply_scaler: length mismatch");
  if (v.schema_fingerprint != p.schema_fingerprint)
    throw FingerprintMismatch("apply_scaler: vector and scaler come from different schemas");
  FeatureVector out = v;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = (out.values[i] - p.mean[i]) / p.stddev[i];
  return out;
}

Matrix apply_scaler(const Matrix& m, const ScalerParams& p) {
  if (m.cols() != p.mean.size()) throw InvalidArgument("apply_scaler: width mismatch");
  if (m.schema_fingerprint != p.schema_fingerprint)
    throw FingerprintMismatch("apply_scaler: matrix and scaler come from different schemas");
  Matrix out = m;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - p.mean[c]) / p.stddev[c];
  return out;
}

std::vector<std::size_t> informative_columns(const Matrix& m, std::span<const std::string> names, std::ostream* diag) {
  auto name_of = [&](std::size_t c) { return c < names.size() ? names[c] : "#" + std::to_string(c); };
  // Dense relabeling of each column: value -> first-seen ordinal.
  std::vector<std::vector<std::uint32_t>> codes(m.cols());
  std::vector<std::size_t> arity(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    std::unordered_map<double, std::uint32_t> seen;
    codes[c].resize(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      auto [it, inserted] = seen.emplace(m(r, c), static_cast<std::uint32_t>(seen.size()));
      codes[c][r] = it->second;
    }
    arity[c] = seen.size();
  }
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (arity[c] <= 1) {
      if (diag) *diag << "notice: dropping single-valued feature " << name_of(c) << '\n';
      continue;
    }
    bool duplicate = false;
    for (auto k : keep) {
      if (arity[k] == arity[c] && codes[k] == codes[c]) {
        if (diag) *diag << "notice: dropping feature " << name_of(c) << " (relabeling of " << name_of(k) << ")\n";
        duplicate = true;
        break;
      }
    }
    if (!duplicate) keep.push_back(c);
  }
  return keep;
}

std::vector<int> binary_targets(std::span<const CorpusRecord> records) {
  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.label == Label::Ham ? 0 : 1);
  return y;
}

void write_feature_csv(std::ostream& out, const Matrix& m, std::span<const std::string> names, std::span<const int> labels) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  for (std::size_t c = 0; c < names.size(); ++c) out << quote(names[c]) << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      out << buf << ',';
    }
    out << (r < labels.size() ? labels[r] : 0) << '\n';
  }
}

}  // namespace emailad
