#pragma once

// Raw email header parsing: field unfolding, addresses, dates, Received
// trace hops. Every function here is total: malformed input degrades to empty
// results, never to an exception.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace emailad {

struct HeaderField {
  std::string name;       // lowercase, no colon, no surrounding whitespace
  std::string raw_value;  // unfolded; never contains CR or LF
  std::size_t order = 0;  // position within the header block

  bool operator==(const HeaderField&) const = default;
};

struct EmailHeader {
  std::vector<HeaderField> fields;
  std::size_t malformed_line_count = 0;

  const HeaderField* find(std::string_view name) const;  // first occurrence
  std::vector<const HeaderField*> find_all(std::string_view name) const;
  std::size_t count(std::string_view name) const;
  bool has(std::string_view name) const { return find(name) != nullptr; }
};

struct ParsedAddress {
  std::string local_part;
  std::string domain;  // lowercase, may be empty
  std::optional<std::string> display_name;

  bool operator==(const ParsedAddress&) const = default;
};

struct DateStamp {
  std::int64_t epoch_seconds = 0;  // UTC instant
  int utc_offset_minutes = 0;
  std::string zone_token;  // verbatim, e.g. "-0400" or "EST"

  bool operator==(const DateStamp&) const = default;
};

struct ReceivedHop {
  std::optional<std::string> from_domain;
  std::optional<std::string> from_ip;
  std::optional<std::string> by_domain;
  std::optional<std::string> via;
  std::optional<std::string> with_protocol;
  std::optional<std::string> id_token;
  std::optional<ParsedAddress> for_address;
  std::optional<DateStamp> timestamp;
  std::string raw;
};

// Parses everything up to the first empty line. Lines may end in CRLF, LF or
// a lone CR. Continuation lines (leading SP/HTAB) are joined to the previous
// field with a single space. Lines without a usable "name:" prefix are
// counted in malformed_line_count and skipped.
EmailHeader parse_headers(std::string_view raw_bytes);

// Canonical "name: value\r\n" serialization followed by the blank line.
std::string serialize_headers(const EmailHeader& header);

ReceivedHop parse_received(std::string_view value);

std::vector<ParsedAddress> parse_address_list(std::string_view value);

std::optional<DateStamp> parse_date(std::string_view value);

// Domain of a message-id, from, sender, reply-to or return-path field.
std::optional<std::string> extract_domain(const HeaderField& field);

// Fixed offset of a named zone (RFC 5322 obsolete zones plus military
// letters, which all map to 0). Returns nullopt for unknown names.
std::optional<int> named_zone_offset(std::string_view zone);

}  // namespace emailad
