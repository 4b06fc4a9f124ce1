#include "emailad/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "emailad/error.hpp"
#include "emailad/util.hpp"

namespace emailad {

namespace fs = std::filesystem;

namespace {

void warn(std::ostream* diag, const std::string& msg) {
  if (diag) *diag << "warning: " << msg << '\n';
}

bool strip_eol(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line.empty();
}

void sort_by_id(std::vector<CorpusRecord>& records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

// Streams one file, handing the header block of each message to sink.
template <typename Sink>
void scan_messages(std::istream& in, Sink&& sink) {
  std::string line;
  std::string block;
  bool first_line = true;
  bool mbox = false;
  bool in_header = true;
  bool prev_blank = false;
  bool have_message = false;
  while (std::getline(in, line)) {
    bool had_cr = !line.empty() && line.back() == '\r';
    bool blank = strip_eol(line);
    if (first_line) {
      first_line = false;
      mbox = line.rfind("From ", 0) == 0;
      have_message = true;
      if (mbox) {
        prev_blank = false;
        continue;
      }
    } else if (mbox && prev_blank && line.rfind("From ", 0) == 0) {
      sink(block);
      block.clear();
      in_header = true;
      prev_blank = false;
      continue;
    }
    if (in_header) {
      if (blank) {
        in_header = false;
        if (!mbox) break;  // single message: the body is never read
      } else {
        block += line;
        block += had_cr ? "\r\n" : "\n";
      }
    }
    prev_blank = blank;
  }
  if (have_message) sink(block);
}

}  // namespace

std::string_view label_name(Label label) {
  switch (label) {
    case Label::Ham: return "ham";
    case Label::Spam: return "spam";
    case Label::Phishing: return "phishing";
  }
  return "ham";
}

Label parse_label(std::string_view name) {
  if (iequals(name, "ham")) return Label::Ham;
  if (iequals(name, "spam")) return Label::Spam;
  if (iequals(name, "phishing")) return Label::Phishing;
  throw InvalidArgument("unknown label '" + std::string(name) + "'");
}

std::string read_header_block(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string block;
  std::string line;
  while (std::getline(in, line)) {
    bool had_cr = !line.empty() && line.back() == '\r';
    if (strip_eol(line)) break;
    block += line;
    block += had_cr ? "\r\n" : "\n";
  }
  return block;
}

std::vector<std::string> split_mbox_headers(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> out;
  scan_messages(in, [&](const std::string& block) { out.push_back(block); });
  return out;
}

Corpus load_trec_index(const fs::path& index_path, const fs::path& root, std::ostream* diag) {
  std::ifstream in(index_path);
  if (!in) throw IoError("cannot open index " + index_path.string());
  Corpus corpus;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    strip_eol(line);
    auto body = trim_space(line);
    if (body.empty()) continue;
    ++corpus.report.index_lines;
    auto sep = body.find_first_of(" \t");
    auto skip = [&](const std::string& why) {
      ++corpus.report.skipped;
      corpus.report.skipped_entries.emplace_back(body);
      warn(diag, why);
    };
    if (sep == std::string_view::npos) {
      skip("malformed index line '" + std::string(body) + "'");
      continue;
    }
    auto label_text = body.substr(0, sep);
    auto rel = std::string(trim_space(body.substr(sep + 1)));
    Label label;
    if (iequals(label_text, "spam")) label = Label::Spam;
    else if (iequals(label_text, "ham")) label = Label::Ham;
    else {
      skip("unknown label in index line '" + std::string(body) + "'");
      continue;
    }
    if (!seen.insert(rel).second) {
      skip("duplicate index entry '" + rel + "'");
      continue;
    }
    fs::path file = root / rel;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) {
      skip("missing email file " + file.string());
      continue;
    }
    std::string block;
    try {
      block = read_header_block(file);
    } catch (const IoError& e) {
      skip(e.what());
      continue;
    }
    corpus.records.push_back({rel, parse_headers(block), label});
  }
  corpus.report.loaded = corpus.records.size();
  sort_by_id(corpus.records);
  return corpus;
}

Corpus load_labeled_dir(const fs::path& dir, Label label, std::ostream* diag) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  Corpus corpus;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    auto rel = fs::relative(file, dir).generic_string();
    if (!in) {
      ++corpus.report.skipped;
      corpus.report.skipped_entries.push_back(rel);
      warn(diag, "cannot read " + file.string());
      continue;
    }
    std::vector<std::string> blocks;
    scan_messages(in, [&](const std::string& block) { blocks.push_back(block); });
    if (blocks.size() == 1) {
      corpus.records.push_back({rel, parse_headers(blocks.front()), label});
    } else {
      for (std::size_t i = 0; i < blocks.size(); ++i)
        corpus.records.push_back({rel + "#" + std::to_string(i), parse_headers(blocks[i]), label});
    }
  }
  if (corpus.records.empty()) warn(diag, "no messages found under " + dir.string());
  corpus.report.loaded = corpus.records.size();
  sort_by_id(corpus.records);
  return corpus;
}

HeaderStats header_frequencies(std::span<const CorpusRecord> records) {
  HeaderStats stats;
  stats.total_emails = records.size();
  for (const auto& r : records) {
    std::set<std::string_view> names;
    for (const auto& f : r.header.fields) names.insert(f.name);
    for (auto n : names) ++stats.doc_freq[std::string(n)];
  }
  return stats;
}

std::vector<std::string> top_k_fields(const HeaderStats& stats, std::size_t k) {
  if (k == 0) throw InvalidArgument("top_k_fields: k must be >= 1");
  std::vector<std::pair<std::string, std::size_t>> entries(stats.doc_freq.begin(), stats.doc_freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < entries.size() && i < k; ++i) out.push_back(entries[i].first);
  return out;
}

std::uint64_t corpus_digest(std::span<const CorpusRecord> records) {
  std::vector<const CorpusRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  Fnv1a64 h;
  h.update_u64(records.size());
  for (const auto* r : sorted) {
    h.update(r->id).update("\x1f").update(label_name(r->label)).update("\x1f");
    h.update(serialize_headers(r->header));
  }
  return h.digest();
}

}  // namespace emailad
