#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emailad/header.hpp"

namespace emailad {

enum class Label { Ham, Spam, Phishing };

std::string_view label_name(Label label);
Label parse_label(std::string_view name);  // case-insensitive; throws InvalidArgument

struct CorpusRecord {
  std::string id;  // source-relative path, "#n" suffix for mbox members
  EmailHeader header;
  Label label = Label::Ham;
};

struct LoadReport {
  std::size_t index_lines = 0;  // non-blank index lines (TREC loader only)
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_entries;
};

struct Corpus {
  std::vector<CorpusRecord> records;  // sorted by id
  LoadReport report;
};

struct HeaderStats {
  std::map<std::string, std::size_t> doc_freq;
  std::size_t total_emails = 0;
};

// Reads a "<label> <relative-path>" index. Paths resolve against root.
// Missing index is fatal (IoError); missing or unreadable emails are skipped
// with one line written to diag.
Corpus load_trec_index(const std::filesystem::path& index_path, const std::filesystem::path& root,
                       std::ostream* diag = nullptr);

// Every regular file under dir (recursively) is either a single message or an
// mbox; an mbox starts with a "From " line and each further "From " line that
// follows a blank line opens a new message.
Corpus load_labeled_dir(const std::filesystem::path& dir, Label label, std::ostream* diag = nullptr);

// Splits in-memory mbox text the same way load_labeled_dir does and returns
// the header block of every message.
std::vector<std::string> split_mbox_headers(std::string_view text);

// Header block of one file: bytes up to and including the first blank line.
std::string read_header_block(const std::filesystem::path& path);

HeaderStats header_frequencies(std::span<const CorpusRecord> records);

std::vector<std::string> top_k_fields(const HeaderStats& stats, std::size_t k);

// Order-insensitive content digest over (id, label, canonical header).
std::uint64_t corpus_digest(std::span<const CorpusRecord> records);

}  // namespace emailad
