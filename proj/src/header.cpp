#include "emailad/header.hpp"

#include <array>
#include <cctype>

#include "emailad/util.hpp"

namespace emailad {

namespace {

bool is_wsp(char c) { return c == ' ' || c == '\t'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool valid_field_name(std::string_view name) {
  if (name.empty()) return false;
  for (unsigned char c : name)
    if (c <= 0x20 || c == 0x7f) return false;
  return true;
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_digit(c)) return false;
  return true;
}

bool all_alpha(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_alpha(c)) return false;
  return true;
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

unsigned days_in_month(int year, int month) {
  static constexpr std::array<unsigned, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return days[month - 1];
}

int month_index(std::string_view tok) {
  static constexpr std::array<std::string_view, 12> months = {
      "jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"};
  if (tok.size() < 3 || !all_alpha(tok)) return 0;
  for (std::size_t i = 0; i < months.size(); ++i)
    if (iequals(tok.substr(0, 3), months[i])) return static_cast<int>(i) + 1;
  return 0;
}

bool is_weekday(std::string_view tok) {
  static constexpr std::array<std::string_view, 7> days = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
  if (tok.size() < 3 || !all_alpha(tok)) return false;
  for (auto d : days)
    if (iequals(tok.substr(0, 3), d)) return true;
  return false;
}

// Removes parenthesized comments (nested, backslash-escaped) outside quotes.
std::string strip_comments(std::string_view s) {
  std::string out;
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\\' && i + 1 < s.size() && (quoted || depth > 0)) {
      if (depth == 0) {
        out += c;
        out += s[i + 1];
      }
      ++i;
      continue;
    }
    if (depth == 0 && c == '"') quoted = !quoted;
    if (!quoted) {
      if (c == '(') {
        ++depth;
        continue;
      }
      if (c == ')' && depth > 0) {
        --depth;
        if (depth == 0) out += ' ';
        continue;
      }
    }
    if (depth == 0) out += c;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_time(std::string_view tok, int& h, int& m, int& s) {
  std::array<std::string_view, 3> parts{};
  std::size_t n = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= tok.size(); ++i) {
    if (i == tok.size() || tok[i] == ':') {
      if (n == 3) return false;
      parts[n++] = tok.substr(start, i - start);
      start = i + 1;
    }
  }
  if (n < 2) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (!all_digits(parts[i]) || parts[i].size() > 2) return false;
  h = to_int(parts[0]);
  m = to_int(parts[1]);
  s = n == 3 ? to_int(parts[2]) : 0;
  return h <= 23 && m <= 59 && s <= 59;
}

bool parse_year(std::string_view tok, int& year) {
  if (!all_digits(tok) || tok.size() < 2 || tok.size() > 4) return false;
  year = to_int(tok);
  if (tok.size() == 2) year += year < 50 ? 2000 : 1900;
  else if (tok.size() == 3) year += 1900;
  return true;
}

bool parse_zone(std::string_view tok, int& offset, std::string& token) {
  if (tok.size() == 5 && (tok[0] == '+' || tok[0] == '-') && all_digits(tok.substr(1))) {
    int hh = to_int(tok.substr(1, 2));
    int mm = to_int(tok.substr(3, 2));
    int total = hh * 60 + mm;
    if (mm > 59 || total > 1440) return false;
    offset = tok[0] == '-' ? -total : total;
    token = std::string(tok);
    return true;
  }
  if (all_alpha(tok)) {
    offset = named_zone_offset(tok).value_or(0);
    token = std::string(tok);
    return true;
  }
  return false;
}

bool looks_like_ip(std::string_view s) {
  if (istarts_with(s, "ipv6:")) s.remove_prefix(5);
  if (s.empty()) return false;
  bool has_sep = false;
  for (char c : s) {
    if (c == '.' || c == ':') has_sep = true;
    else if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
  }
  return has_sep;
}

std::optional<std::string> bracketed_ip(std::string_view s) {
  auto open = s.find('[');
  while (open != std::string_view::npos) {
    auto close = s.find(']', open);
    if (close == std::string_view::npos) break;
    auto inner = s.substr(open + 1, close - open - 1);
    if (looks_like_ip(inner)) {
      if (istarts_with(inner, "ipv6:")) inner.remove_prefix(5);
      return std::string(inner);
    }
    open = s.find('[', close);
  }
  return std::nullopt;
}

std::optional<std::string> bare_ipv4(std::string_view s) {
  for (auto tok : split_ws(s)) {
    while (!tok.empty() && !is_digit(tok.front())) tok.remove_prefix(1);
    while (!tok.empty() && !is_digit(tok.back())) tok.remove_suffix(1);
    int dots = 0;
    bool ok = !tok.empty();
    for (char c : tok) {
      if (c == '.') ++dots;
      else if (!is_digit(c)) ok = false;
    }
    if (ok && dots == 3) return std::string(tok);
  }
  return std::nullopt;
}

std::string clean_domain(std::string_view s) {
  std::size_t end = 0;
  while (end < s.size()) {
    char c = s[end];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == ',' || c == ';' ||
        c == '"' || c == '(' || c == ')' || c == '@')
      break;
    ++end;
  }
  return to_lower(s.substr(0, end));
}

std::string unquote_display(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      out += s[++i];
    } else if (s[i] != '"') {
      out += s[i];
    }
  }
  return std::string(trim_space(out));
}

std::optional<ParsedAddress> parse_mailbox(std::string_view item) {
  // Locate a top-level angle address.
  int depth = 0;
  bool quoted = false;
  std::size_t open = std::string_view::npos;
  for (std::size_t i = 0; i < item.size(); ++i) {
    char c = item[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (depth == 0 && c == '"') quoted = !quoted;
    if (quoted) continue;
    if (c == '(') ++depth;
    else if (c == ')' && depth > 0) --depth;
    else if (c == '<' && depth == 0) {
      open = i;
      break;
    }
  }

  std::string addr;
  std::optional<std::string> display;
  if (open != std::string_view::npos) {
    auto close = item.find('>', open);
    auto inner = item.substr(open + 1, close == std::string_view::npos ? std::string_view::npos : close - open - 1);
    addr = std::string(trim_space(strip_comments(inner)));
    auto name = unquote_display(strip_comments(item.substr(0, open)));
    if (!name.empty()) display = name;
  } else {
    addr = std::string(trim_space(strip_comments(item)));
  }

  // Obsolete source route: "@relay1,@relay2:user@host".
  if (!addr.empty() && addr.front() == '@') {
    auto colon = addr.find(':');
    if (colon != std::string::npos) addr = addr.substr(colon + 1);
  }

  // Last '@' outside quotes separates local part and domain.
  std::size_t at = std::string::npos;
  quoted = false;
  for (std::size_t i = 0; i < addr.size(); ++i) {
    if (addr[i] == '\\') {
      ++i;
      continue;
    }
    if (addr[i] == '"') quoted = !quoted;
    else if (addr[i] == '@' && !quoted) at = i;
  }
  if (at == std::string::npos) return std::nullopt;
  auto local = trim_space(std::string_view(addr).substr(0, at));
  if (local.empty()) return std::nullopt;
  ParsedAddress out;
  out.local_part = std::string(local);
  out.domain = clean_domain(trim_space(std::string_view(addr).substr(at + 1)));
  out.display_name = std::move(display);
  return out;
}

}  // namespace

const HeaderField* EmailHeader::find(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

std::vector<const HeaderField*> EmailHeader::find_all(std::string_view name) const {
  std::vector<const HeaderField*> out;
  for (const auto& f : fields)
    if (f.name == name) out.push_back(&f);
  return out;
}

std::size_t EmailHeader::count(std::string_view name) const {
  std::size_t n = 0;
  for (const auto& f : fields)
    if (f.name == name) ++n;
  return n;
}

EmailHeader parse_headers(std::string_view raw) {
  EmailHeader header;
  bool attached = false;  // previous line belonged to a field
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t eol = raw.find_first_of("\r\n", pos);
    std::string_view line = raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (eol == std::string_view::npos) {
      pos = raw.size();
    } else {
      pos = eol + ((raw[eol] == '\r' && eol + 1 < raw.size() && raw[eol + 1] == '\n') ? 2 : 1);
    }

    if (line.empty()) break;

    if (is_wsp(line.front())) {
      if (!attached) {
        ++header.malformed_line_count;
        continue;
      }
      auto cont = trim_wsp(line);
      if (!cont.empty()) {
        auto& value = header.fields.back().raw_value;
        if (!value.empty()) value += ' ';
        value.append(cont);
      }
      continue;
    }

    auto colon = line.find(':');
    auto name = colon == std::string_view::npos ? std::string_view{} : trim_wsp(line.substr(0, colon));
    if (!valid_field_name(name)) {
      ++header.malformed_line_count;
      attached = false;
      continue;
    }
    HeaderField field;
    field.name = to_lower(name);
    field.raw_value = std::string(trim_wsp(line.substr(colon + 1)));
    field.order = header.fields.size();
    header.fields.push_back(std::move(field));
    attached = true;
  }
  return header;
}

std::string serialize_headers(const EmailHeader& header) {
  std::string out;
  for (const auto& f : header.fields) {
    out += f.name;
    out += ": ";
    out += f.raw_value;
    out += "\r\n";
  }
  out += "\r\n";
  return out;
}

std::optional<int> named_zone_offset(std::string_view zone) {
  struct Named {
    std::string_view name;
    int offset;
  };
  static constexpr std::array<Named, 11> table = {{{"UT", 0},
                                                    {"GMT", 0},
                                                    {"UTC", 0},
                                                    {"EST", -300},
                                                    {"EDT", -240},
                                                    {"CST", -360},
                                                    {"CDT", -300},
                                                    {"MST", -420},
                                                    {"MDT", -360},
                                                    {"PST", -480},
                                                    {"PDT", -420}}};
  for (const auto& z : table)
    if (iequals(zone, z.name)) return z.offset;
  if (zone.size() == 1 && is_alpha(zone[0]) && zone[0] != 'j' && zone[0] != 'J') return 0;
  return std::nullopt;
}

std::optional<DateStamp> parse_date(std::string_view value) {
  std::string cleaned = strip_comments(value);
  for (auto& c : cleaned)
    if (c == ',') c = ' ';
  auto tok = split_ws(cleaned);
  std::size_t i = 0;
  if (i < tok.size() && is_weekday(tok[i])) ++i;
  if (i >= tok.size()) return std::nullopt;

  int day = 0, month = 0, year = 0, hh = 0, mi = 0, ss = 0;
  std::string zone_token;
  int offset = 0;
  bool have_zone = false;

  if (all_digits(tok[i])) {
    // day month year time [zone]
    if (tok[i].size() > 2 || i + 3 >= tok.size()) return std::nullopt;
    day = to_int(tok[i]);
    month = month_index(tok[i + 1]);
    if (!month || !parse_year(tok[i + 2], year) || !parse_time(tok[i + 3], hh, mi, ss)) return std::nullopt;
    i += 4;
    if (i < tok.size()) {
      if (!parse_zone(tok[i], offset, zone_token)) return std::nullopt;
      have_zone = true;
    }
  } else {
    // asctime-like: month day time [zone] year
    month = month_index(tok[i]);
    if (!month || i + 3 >= tok.size() || !all_digits(tok[i + 1]) || tok[i + 1].size() > 2) return std::nullopt;
    day = to_int(tok[i + 1]);
    if (!parse_time(tok[i + 2], hh, mi, ss)) return std::nullopt;
    i += 3;
    if (parse_year(tok[i], year)) {
      ++i;
      if (i < tok.size()) {
        if (!parse_zone(tok[i], offset, zone_token)) return std::nullopt;
        have_zone = true;
      }
    } else {
      if (!parse_zone(tok[i], offset, zone_token)) return std::nullopt;
      have_zone = true;
      if (i + 1 >= tok.size() || !parse_year(tok[i + 1], year)) return std::nullopt;
    }
  }
  (void)have_zone;
  if (year < 1900 || year > 9999 || day < 1 || day > static_cast<int>(days_in_month(year, month)))
    return std::nullopt;

  DateStamp out;
  out.epoch_seconds = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) * 86400 +
                      hh * 3600 + mi * 60 + ss - static_cast<std::int64_t>(offset) * 60;
  out.utc_offset_minutes = offset;
  out.zone_token = std::move(zone_token);
  return out;
}

std::vector<ParsedAddress> parse_address_list(std::string_view value) {
  std::vector<std::string> items;
  std::string current;
  int depth = 0;
  bool quoted = false;
  bool angle = false;
  for (std::size_t i = 0; i < value.size(); ++i) {
    char c = value[i];
    if (c == '\\' && i + 1 < value.size() && (quoted || depth > 0)) {
      current += c;
      current += value[++i];
      continue;
    }
    if (depth == 0 && c == '"' && !angle) quoted = !quoted;
    else if (!quoted) {
      if (c == '(') ++depth;
      else if (c == ')' && depth > 0) --depth;
      else if (depth == 0) {
        if (c == '<') angle = true;
        else if (c == '>') angle = false;
        else if (!angle && c == ',') {
          items.push_back(std::move(current));
          current.clear();
          continue;
        } else if (!angle && c == ':') {
          // Group display name ends here; its members follow.
          current.clear();
          continue;
        } else if (!angle && c == ';') {
          items.push_back(std::move(current));
          current.clear();
          continue;
        }
      }
    }
    current += c;
  }
  items.push_back(std::move(current));

  std::vector<ParsedAddress> out;
  for (const auto& item : items) {
    if (trim_space(item).empty()) continue;
    if (auto addr = parse_mailbox(item)) out.push_back(std::move(*addr));
  }
  return out;
}

ReceivedHop parse_received(std::string_view value) {
  ReceivedHop hop;
  hop.raw = std::string(value);

  // The date follows the last top-level ';'.
  int depth = 0;
  std::size_t semi = std::string_view::npos;
  for (std::size_t i = 0; i < value.size(); ++i) {
    char c = value[i];
    if (c == '\\') {
      ++i;
      continue;
    }
    if (c == '(') ++depth;
    else if (c == ')' && depth > 0) --depth;
    else if (c == ';' && depth == 0) semi = i;
  }
  std::string_view head = value.substr(0, semi);
  if (semi != std::string_view::npos) hop.timestamp = parse_date(trim_space(value.substr(semi + 1)));

  // Tokens: bare words and whole parenthesized comments.
  struct Token {
    std::string_view text;
    bool comment;
  };
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < head.size()) {
    char c = head[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      std::size_t start = i;
      int d = 0;
      for (; i < head.size(); ++i) {
        if (head[i] == '\\') {
          ++i;
          continue;
        }
        if (head[i] == '(') ++d;
        else if (head[i] == ')' && --d == 0) {
          ++i;
          break;
        }
      }
      tokens.push_back({head.substr(start, std::min(i, head.size()) - start), true});
    } else {
      std::size_t start = i;
      while (i < head.size() && !std::isspace(static_cast<unsigned char>(head[i])) && head[i] != '(') ++i;
      tokens.push_back({head.substr(start, i - start), false});
    }
  }

  enum class Clause { None, From, By, Via, With, Id, For };
  Clause current = Clause::None;
  bool awaiting_value = false;
  bool seen[7] = {};
  auto keyword = [](std::string_view w) {
    if (iequals(w, "from")) return Clause::From;
    if (iequals(w, "by")) return Clause::By;
    if (iequals(w, "via")) return Clause::Via;
    if (iequals(w, "with")) return Clause::With;
    if (iequals(w, "id")) return Clause::Id;
    if (iequals(w, "for")) return Clause::For;
    return Clause::None;
  };
  auto strip_punct = [](std::string_view w) {
    while (!w.empty() && (w.back() == ',' || w.back() == ';')) w.remove_suffix(1);
    return w;
  };

  for (const auto& tok : tokens) {
    if (tok.comment) {
      if (current == Clause::From && !hop.from_ip) {
        hop.from_ip = bracketed_ip(tok.text);
        if (!hop.from_ip) hop.from_ip = bare_ipv4(tok.text);
      }
      continue;
    }
    auto kw = keyword(tok.text);
    if (kw != Clause::None && !seen[static_cast<int>(kw)] && !awaiting_value) {
      current = kw;
      seen[static_cast<int>(kw)] = true;
      awaiting_value = true;
      continue;
    }
    if (!awaiting_value) {
      if (current == Clause::From && !hop.from_ip && !tok.text.empty() && tok.text.front() == '[')
        hop.from_ip = bracketed_ip(tok.text);
      continue;
    }
    awaiting_value = false;
    auto word = strip_punct(tok.text);
    if (word.empty()) continue;
    switch (current) {
      case Clause::From:
        if (word.front() == '[') {
          hop.from_ip = bracketed_ip(word);
        } else {
          hop.from_domain = to_lower(word);
        }
        break;
      case Clause::By:
        hop.by_domain = to_lower(word);
        break;
      case Clause::Via:
        hop.via = std::string(word);
        break;
      case Clause::With:
        hop.with_protocol = std::string(word);
        break;
      case Clause::Id:
        hop.id_token = std::string(word);
        break;
      case Clause::For: {
        auto addrs = parse_address_list(word);
        if (!addrs.empty()) hop.for_address = std::move(addrs.front());
        break;
      }
      case Clause::None:
        break;
    }
  }
  return hop;
}

std::optional<std::string> extract_domain(const HeaderField& field) {
  if (field.name == "message-id") {
    std::string_view v = field.raw_value;
    auto open = v.find('<');
    if (open != std::string_view::npos) {
      auto close = v.find('>', open);
      v = v.substr(open + 1, close == std::string_view::npos ? std::string_view::npos : close - open - 1);
    }
    auto at = v.rfind('@');
    if (at == std::string_view::npos) return std::nullopt;
    auto domain = clean_domain(trim_space(v.substr(at + 1)));
    if (domain.empty()) return std::nullopt;
    return domain;
  }
  auto addrs = parse_address_list(field.raw_value);
  if (addrs.empty() || addrs.front().domain.empty()) return std::nullopt;
  return addrs.front().domain;
}

}  // namespace emailad
