#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "emailad/bundle.hpp"
#include "emailad/error.hpp"
#include "emailad/features.hpp"
#include "emailad/synth.hpp"
#include "support.hpp"

using namespace emailad;

namespace {

CorpusRecord record(const std::string& raw, Label label = Label::Ham) {
  static int id = 0;
  return {std::to_string(id++), parse_headers(raw), label};
}

double value_of(const FeatureSchema& s, const FeatureVector& v, const std::string& name) {
  auto names = s.names();
  auto it = std::find(names.begin(), names.end(), name);
  REQUIRE(it != names.end());
  return v.values[static_cast<std::size_t>(it - names.begin())];
}

std::vector<CorpusRecord> synthetic_records(std::size_t n, std::uint64_t seed) {
  std::vector<CorpusRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    Label l = static_cast<Label>(i % 3);
    out.push_back({"s" + std::to_string(i), parse_headers(synth_email(l, seed + i)), l});
  }
  return out;
}

const char* kBase =
    "From: Alice <alice@a.org>\r\n"
    "To: bob@b.com, carol@c.com\r\n"
    "Cc: dave@d.net\r\n"
    "Message-ID: <123@a.org>\r\n"
    "Date: Tue, 1 May 2007 10:00:00 -0400\r\n"
    "Content-Type: text/html; charset=us-ascii\r\n"
    "Received: from mx.a.com by mx.b.com; Tue, 1 May 2007 10:00:00 -0400\r\n"
    "Received: from mx.b.com by mx.c.com; Tue, 1 May 2007 10:00:00 -0400\r\n"
    "Received: from mx.c.com by mx.d.com; Tue, 1 May 2007 10:00:00 -0400\r\n";

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("DomainMatchOnly has the six comparison features") {
    std::vector<CorpusRecord> recs = {record(std::string(kBase) + "\r\n")};
    auto s = fit_schema(recs, 50, FeatureSet::DomainMatchOnly);
    REQUIRE(s.size() == 6);
    for (const auto& d : s.descriptors) CHECK(d.category == FeatureCategory::Comparison);
  }

  TEST_CASE("Full catalog size with all top fields present") {
    std::string raw;
    for (int f = 0; f < 60; ++f) raw += "X-F" + std::to_string(f) + ": v\r\n";
    std::vector<CorpusRecord> recs = {record(raw + "\r\n"), record(raw + "\r\n")};
    auto s = fit_schema(recs, 50, FeatureSet::Full);
    CHECK(s.top_fields.size() == 50);
    CHECK(s.size() == 50 + 6 + 4 + 6);
    std::set<std::string> unique;
    for (const auto& n : s.names()) unique.insert(n);
    CHECK(unique.size() == s.size());
  }

  TEST_CASE("mode_timezone and mode_msgid_domain") {
    std::vector<CorpusRecord> recs;
    for (int i = 0; i < 10; ++i) {
      std::string zone = i < 7 ? "-0400" : "+0100";
      std::string dom = i < 4 ? "x.org" : "y.org";
      recs.push_back(record("Date: 1 May 2007 10:00:00 " + zone + "\r\nMessage-ID: <" + std::to_string(i) + "@" + dom + ">\r\n\r\n"));
    }
    auto s = fit_schema(recs, 50, FeatureSet::Full);
    CHECK(s.mode_timezone == "-0400");
    CHECK(s.mode_msgid_domain == "y.org");
  }

  TEST_CASE("fit_schema rejects an empty corpus") {
    std::vector<CorpusRecord> none;
    CHECK_THROWS_AS(fit_schema(none, 50, FeatureSet::Full), InvalidArgument);
  }

  TEST_CASE("extraction semantics") {
    std::vector<CorpusRecord> fit = {record(std::string(kBase) + "\r\n"),
                                     record("Message-ID: <9@z.org>\r\nFrom: z@z.org\r\n\r\n")};
    auto s = fit_schema(fit, 50, FeatureSet::Full);
    auto base = extract(parse_headers(std::string(kBase) + "\r\n"), s);
    CHECK(base.values.size() == s.size());
    CHECK(base.schema_fingerprint == s.fingerprint);
    CHECK(value_of(s, base, "missing:message-id") == 0);
    CHECK(value_of(s, base, "hop_count") == 3);
    CHECK(value_of(s, base, "to_count") == 2);
    CHECK(value_of(s, base, "cc_count") == 1);
    CHECK(value_of(s, base, "recipient_count") == 4);
    CHECK(value_of(s, base, "header_field_count") == 9);
    CHECK(value_of(s, base, "distinct_header_count") == 7);
    CHECK(value_of(s, base, "content_type_html") == 1);
    CHECK(value_of(s, base, "date_parses") == 1);
    CHECK(value_of(s, base, "domain_match:from~message-id") == kDomainMatch);
    CHECK(value_of(s, base, "domain_match:from~reply-to") == kOperandMissing);
    CHECK(value_of(s, base, "domain_match:from~received") == kDomainMismatch);

    auto no_id = extract(parse_headers("From: x@a.org\r\n\r\n"), s);
    CHECK(value_of(s, no_id, "missing:message-id") == 1);
    CHECK(value_of(s, no_id, "content_type_html") == kOperandMissing);
    CHECK(value_of(s, no_id, "msgid_domain_mismatch") == kOperandMissing);
    CHECK(value_of(s, no_id, "date_parses") == 0);
  }

  TEST_CASE("received chain pairs the first hop's by with the second's from") {
    ReceivedHop first, second;
    first.by_domain = "mx.a.com";
    second.from_domain = "mx.a.com";
    std::vector<ReceivedHop> hops = {first, second};
    CHECK(received_chain_value(hops, false) == 1);
    hops[1].from_domain = "mx.b.com";
    CHECK(received_chain_value(hops, false) == 0);
    hops[1].from_domain.reset();
    CHECK(received_chain_value(hops, false) == 1);  // skipped pair
    CHECK(received_chain_value(std::span<const ReceivedHop>(hops.data(), 1), false) == 1);
    CHECK(received_chain_value({}, false) == 1);

    // Transposed: hop i's from against hop i+1's by.
    ReceivedHop a, b;
    a.from_domain = "relay.x";
    b.by_domain = "relay.x";
    std::vector<ReceivedHop> t = {a, b};
    CHECK(received_chain_value(t, true) == 1);
    CHECK(received_chain_value(t, false) == 1);
    t[1].by_domain = "other";
    CHECK(received_chain_value(t, true) == 0);
  }

  TEST_CASE("encoding ranges and hop count on synthetic headers") {
    auto recs = synthetic_records(300, 1);
    auto s = fit_schema(recs, 50, FeatureSet::Full);
    auto names = s.names();
    for (const auto& r : recs) {
      auto v = extract(r, s);
      REQUIRE(v.values.size() == s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        double x = v.values[j];
        CHECK(std::isfinite(x));
        const auto& d = s.descriptors[j];
        if (d.encoding.kind == EncodingKind::Binary01) CHECK((x == 0 || x == 1));
        if (d.category == FeatureCategory::Comparison && d.encoding.kind == EncodingKind::Ordinal)
          CHECK((x == 0 || x == 1 || x == 2));
        if (d.category == FeatureCategory::Counting) CHECK((x >= 0 && x == std::floor(x)));
        if (d.kind == FeatureKind::HopCount) {
          std::size_t count = 0;
          for (const auto& f : r.header.fields) count += f.name == "received";
          CHECK(x == static_cast<double>(count));
        }
      }
    }
  }

  TEST_CASE("one-hot option expands ternary features") {
    auto recs = synthetic_records(60, 2);
    auto ordinal = fit_schema(recs, 10, FeatureSet::DomainMatchOnly);
    auto hot = fit_schema(recs, 10, FeatureSet::DomainMatchOnly, {.one_hot = true});
    CHECK(hot.size() == 5 * 3 + 1);
    CHECK(hot.fingerprint != ordinal.fingerprint);
    for (const auto& r : recs) {
      auto v = extract(r, hot);
      for (int g = 0; g < 5; ++g) {
        double sum = 0;
        for (int l = 0; l < 3; ++l) sum += v.values[static_cast<std::size_t>(3 * g + l)];
        CHECK(sum == 1.0);
      }
    }
  }

  TEST_CASE("schema determinism and fingerprint sensitivity") {
    auto recs = synthetic_records(120, 3);
    auto s = fit_schema(recs, 20, FeatureSet::Full);
    std::mt19937_64 rng(1);
    std::shuffle(recs.begin(), recs.end(), rng);
    auto t = fit_schema(recs, 20, FeatureSet::Full);
    CHECK(s == t);
    CHECK(compute_fingerprint(s) == s.fingerprint);

    auto changed = s;
    changed.mode_timezone += "x";
    CHECK(compute_fingerprint(changed) != s.fingerprint);
    changed = s;
    changed.descriptors[3].missing_code = 7;
    CHECK(compute_fingerprint(changed) != s.fingerprint);
    changed = s;
    changed.options.chain_transpose = true;
    CHECK(compute_fingerprint(changed) != s.fingerprint);
    CHECK(fit_schema(recs, 19, FeatureSet::Full).fingerprint != s.fingerprint);
  }

  TEST_CASE("schema subset and select") {
    auto recs = synthetic_records(60, 4);
    auto s = fit_schema(recs, 10, FeatureSet::Full);
    std::vector<std::size_t> keep = {0, 3, 5};
    auto sub = s.subset(keep);
    REQUIRE(sub.size() == 3);
    CHECK(sub.descriptors[1] == s.descriptors[3]);
    CHECK(sub.fingerprint != s.fingerprint);
    std::vector<std::string> names = {s.names()[5], s.names()[0]};
    CHECK(s.select(names).names() == names);  // requested order
  }

  TEST_CASE("train/serve consistency through a persisted schema") {
    auto recs = synthetic_records(90, 5);
    auto s = fit_schema(recs, 30, FeatureSet::Full);
    auto loaded = schema_from_json(nlohmann::json::parse(schema_to_json(s).dump()));
    CHECK(loaded == s);
    for (const auto& r : recs) {
      auto a = extract(r, s), b = extract(parse_headers(synth_email(r.label, 5 + std::stoul(r.id.substr(1)))), loaded);
      CHECK(a.values == b.values);
    }
  }

  TEST_CASE("stack_vectors rejects mixed fingerprints") {
    FeatureVector a{{1, 2}, 1}, b{{3, 4}, 2};
    std::vector<FeatureVector> v = {a, b};
    CHECK_THROWS_AS(stack_vectors(v), FingerprintMismatch);
    v[1].schema_fingerprint = 1;
    auto m = stack_vectors(v);
    CHECK(m.rows() == 2);
    CHECK(m(1, 0) == 3);
    CHECK(m.schema_fingerprint == 1);
  }

  TEST_CASE("fit_scaler fixtures") {
    Matrix m(4, 2);
    double col0[] = {0, 0, 2, 2};
    for (int i = 0; i < 4; ++i) {
      m(i, 0) = col0[i];
      m(i, 1) = 5;
    }
    auto p = fit_scaler(m);
    CHECK(p.mean == std::vector<double>{1, 5});
    CHECK(p.stddev == std::vector<double>{1, 1});
    auto out = apply_scaler(m, p);
    for (int i = 0; i < 4; ++i) CHECK(out(i, 1) == 0.0);

    ScalerParams q{{1}, {2}, 0};
    CHECK(apply_scaler(FeatureVector{{3}, 0}, q).values[0] == 1.0);
    CHECK_THROWS_AS(apply_scaler(FeatureVector{{3, 4}, 0}, q), InvalidArgument);
  }

  TEST_CASE("scaled random matrix has unit moments") {
    auto m = testing::gaussian_matrix(100, 10, 17);
    for (std::size_t i = 0; i < 100; ++i)
      for (std::size_t j = 0; j < 10; ++j) m(i, j) = m(i, j) * static_cast<double>(j + 1) + 3.0 * static_cast<double>(j);
    auto out = apply_scaler(m, fit_scaler(m));
    for (std::size_t j = 0; j < 10; ++j) {
      long double s = 0, ss = 0;
      for (std::size_t i = 0; i < 100; ++i) s += out(i, j);
      long double mean = s / 100;
      for (std::size_t i = 0; i < 100; ++i) ss += (out(i, j) - mean) * (out(i, j) - mean);
      CHECK(std::fabs(static_cast<double>(mean)) < 1e-9);
      CHECK(std::fabs(std::sqrt(static_cast<double>(ss / 100)) - 1.0) < 1e-9);
    }
  }

  TEST_CASE("informative_columns drops constants and relabelings") {
    Matrix m(4, 4);
    double rows[4][4] = {{1, 7, 0, 2}, {1, 7, 1, 3}, {1, 7, 0, 2}, {1, 7, 1, 0}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = rows[i][j];
    // Column 3 differs from column 2 on row 3, so it is not a relabeling.
    std::vector<std::string> names = {"c0", "c1", "c2", "c3"};
    std::ostringstream diag;
    CHECK(informative_columns(m, names, &diag) == std::vector<std::size_t>{2, 3});
    CHECK(diag.str().find("c0") != std::string::npos);
    m(3, 3) = 3;  // now c3 = 2 + c2, a one-to-one relabeling
    CHECK(informative_columns(m, names) == std::vector<std::size_t>{2});
  }

  TEST_CASE("feature CSV has a header row and a label column") {
    Matrix m(2, 2);
    m(0, 0) = 1;
    m(1, 1) = 0.5;
    std::vector<std::string> names = {"a", "b"};
    std::vector<int> y = {0, 1};
    std::ostringstream out;
    write_feature_csv(out, m, names, y);
    std::istringstream lines(out.str());
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header == "a,b,label");
    CHECK(first.substr(first.rfind(',') + 1) == "0");
  }
}
