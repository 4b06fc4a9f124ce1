#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "emailad/corpus.hpp"
#include "emailad/error.hpp"
#include "support.hpp"

using namespace emailad;
using testing::TempDir;
using testing::write_file;

namespace {

CorpusRecord record(const std::string& id, const std::string& raw, Label label = Label::Ham) {
  return {id, parse_headers(raw), label};
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("load_trec_index maps labels and counts skips") {
    TempDir dir("trec");
    write_file(dir / "data/inmail.1", "From: a@spam.biz\r\nSubject: buy\r\n\r\nbody\r\n");
    write_file(dir / "data/inmail.2", "From: b@x.org\r\n\r\n");
    write_file(dir / "index", "spam data/inmail.1\nHAM data/inmail.2\n");
    std::ostringstream diag;
    auto c = load_trec_index(dir / "index", dir.path(), &diag);
    REQUIRE(c.records.size() == 2);
    CHECK(c.records[0].label == Label::Spam);
    CHECK(c.records[1].label == Label::Ham);
    CHECK(c.records[0].header.fields.size() == 2);
    CHECK(diag.str().empty());

    write_file(dir / "index2", "spam data/inmail.1\nham data/missing.9\n\n");
    auto d = load_trec_index(dir / "index2", dir.path(), &diag);
    CHECK(d.records.size() == 1);
    CHECK(d.report.skipped == 1);
    CHECK(d.report.loaded + d.report.skipped == d.report.index_lines);
    CHECK(diag.str().find("missing.9") != std::string::npos);
  }

  TEST_CASE("load_trec_index: missing index is fatal, bad label is skipped") {
    TempDir dir("trec");
    CHECK_THROWS_AS(load_trec_index(dir / "nope", dir.path()), IoError);
    write_file(dir / "data/m", "From: a@b.c\r\n\r\n");
    write_file(dir / "index", "eggs data/m\nham data/m\n");
    auto c = load_trec_index(dir / "index", dir.path());
    CHECK(c.records.size() == 1);
    CHECK(c.report.skipped == 1);
  }

  TEST_CASE("load_labeled_dir: single files and mbox members") {
    TempDir dir("lab");
    for (int i = 0; i < 3; ++i) write_file(dir / ("single/m" + std::to_string(i)), "From: x@p.com\r\nTo: y@q.com\r\n\r\nhi\r\n");
    auto s = load_labeled_dir(dir / "single", Label::Phishing);
    REQUIRE(s.records.size() == 3);
    for (const auto& r : s.records) CHECK(r.label == Label::Phishing);

    const std::string mbox =
        "From sender@p.com Mon Jan  1 00:00:00 2007\n"
        "From: a@p.com\nSubject: one\n\nbody line\nFrom the desk of nobody\n\n"
        "From sender@q.com Mon Jan  1 00:00:01 2007\n"
        "From: b@q.com\nSubject: two\n\nbody\n";
    // Two "From " separator lines open a message: the first line and the one
    // after a blank line. "From the desk" follows body text, so it does not.
    std::size_t expected = 0;
    std::istringstream lines(mbox);
    std::string line, prev = "";
    bool first = true;
    while (std::getline(lines, line)) {
      if (line.rfind("From ", 0) == 0 && (first || prev.empty())) ++expected;
      first = false;
      prev = line;
    }
    REQUIRE(expected == 2);
    write_file(dir / "mbox/box.mbox", mbox);
    auto m = load_labeled_dir(dir / "mbox", Label::Phishing);
    REQUIRE(m.records.size() == expected);
    CHECK(m.records[0].header.find("subject")->raw_value == "one");
    CHECK(m.records[1].header.find("subject")->raw_value == "two");
    CHECK(m.records[0].id != m.records[1].id);
    CHECK(split_mbox_headers(mbox).size() == expected);
  }

  TEST_CASE("load_labeled_dir: empty directory warns") {
    TempDir dir("empty");
    std::ostringstream diag;
    auto c = load_labeled_dir(dir.path(), Label::Phishing, &diag);
    CHECK(c.records.empty());
    CHECK_FALSE(diag.str().empty());
  }

  TEST_CASE("read_header_block stops at the blank line") {
    TempDir dir("hb");
    write_file(dir / "m", "A: 1\r\nB: 2\r\n\r\nbody\r\nC: 3\r\n");
    CHECK(read_header_block(dir / "m") == "A: 1\r\nB: 2\r\n");
  }

  TEST_CASE("header_frequencies counts documents") {
    std::vector<CorpusRecord> recs = {record("1", "From: a@b\r\nX-Mailer: m\r\n\r\n"), record("2", "From: c@d\r\n\r\n")};
    auto s = header_frequencies(recs);
    CHECK(s.total_emails == 2);
    CHECK(s.doc_freq == std::map<std::string, std::size_t>{{"from", 2}, {"x-mailer", 1}});

    std::string five;
    for (int i = 0; i < 5; ++i) five += "Received: hop\r\n";
    std::vector<CorpusRecord> one = {record("r", five + "\r\n")};
    CHECK(header_frequencies(one).doc_freq.at("received") == 1);
  }

  TEST_CASE("header_frequencies is permutation invariant") {
    std::vector<CorpusRecord> recs;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
      std::string raw;
      for (int f = 0; f < 10; ++f)
        if (rng() % 3 == 0) raw += "F" + std::to_string(f) + ": v\r\n";
      recs.push_back(record(std::to_string(i), raw + "\r\n"));
    }
    auto base = header_frequencies(recs);
    std::shuffle(recs.begin(), recs.end(), rng);
    CHECK(header_frequencies(recs).doc_freq == base.doc_freq);
  }

  TEST_CASE("top_k_fields: tie rule and short lists") {
    HeaderStats s{{{"a", 5}, {"b", 3}, {"c", 3}}, 5};
    CHECK(top_k_fields(s, 2) == std::vector<std::string>{"a", "b"});
    CHECK(top_k_fields(s, 10) == std::vector<std::string>{"a", "b", "c"});
  }

  TEST_CASE("top_k_fields matches a brute-force sort") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 50; ++t) {
      HeaderStats s;
      s.total_emails = 100;
      for (int f = 0; f < 80; ++f) s.doc_freq["f" + std::to_string(rng() % 200)] = rng() % 20;
      std::vector<std::pair<std::string, std::size_t>> all(s.doc_freq.begin(), s.doc_freq.end());
      std::vector<std::string> oracle;
      const std::size_t picks = std::min<std::size_t>(50, all.size());
      for (std::size_t pick = 0; pick < picks; ++pick) {
        // Selection sort: largest count, smallest name among the remaining.
        std::size_t best = 0;
        for (std::size_t i = 1; i < all.size(); ++i)
          if (all[i].second > all[best].second || (all[i].second == all[best].second && all[i].first < all[best].first))
            best = i;
        oracle.push_back(all[best].first);
        all.erase(all.begin() + static_cast<std::ptrdiff_t>(best));
      }
      CHECK(top_k_fields(s, 50) == oracle);
    }
  }

  TEST_CASE("corpus_digest ignores order but sees content") {
    std::vector<CorpusRecord> recs = {record("1", "From: a@b\r\n\r\n"), record("2", "To: c@d\r\n\r\n", Label::Spam)};
    auto d = corpus_digest(recs);
    std::swap(recs[0], recs[1]);
    CHECK(corpus_digest(recs) == d);
    recs[0].label = Label::Ham;
    CHECK(corpus_digest(recs) != d);
  }

  TEST_CASE("labels parse case-insensitively") {
    CHECK(parse_label("SPAM") == Label::Spam);
    CHECK(parse_label("Phishing") == Label::Phishing);
    CHECK_THROWS_AS(parse_label("eggs"), InvalidArgument);
    CHECK(label_name(Label::Ham) == "ham");
  }
}
