#include "emailad/report.hpp"

#include <algorithm>
#include <cstdio>

namespace emailad {

namespace {

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

using Rows = std::vector<std::vector<std::string>>;

std::string layout(const Rows& rows, const std::string& title) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::string out;
  if (!title.empty()) out += title + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const auto& cell = rows[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      line += c == 0 ? cell + pad : "  " + pad + cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

std::string to_csv(const Rows& rows) {
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + csv_cell(r[c]);
    out += "\n";
  }
  return out;
}

std::string metric(const EvalReport& r, int which) {
  switch (which) {
    case 0: return format_percent(r.accuracy);
    case 1: return format_percent(r.f1);
    case 2: return format_percent(r.recall);
    case 3: return format_percent(r.precision);
    default: return format_auc(r.auc);
  }
}

constexpr const char* kMetricNames[] = {"Accuracy", "F1", "Recall", "Precision", "AUC"};

}  // namespace

std::string format_percent(double v) { return fixed4(100.0 * v); }
std::string format_auc(const std::optional<double>& v) { return v ? fixed4(*v) : "-"; }

RenderedTable render_table(const std::vector<NamedReport>& reports, TableStyle style, const std::string& title) {
  Rows rows;
  if (style == TableStyle::OneClass) {
    std::vector<std::string> header{"Metric"};
    for (const auto& [name, r] : reports) header.push_back(name);
    rows.push_back(header);
    for (int m = 0; m < 5; ++m) {
      std::vector<std::string> row{kMetricNames[m]};
      for (const auto& [name, r] : reports) row.push_back(metric(r, m));
      rows.push_back(row);
    }
  } else {
    std::vector<std::string> header{style == TableStyle::Stacking ? "Base learners" : "Algorithm"};
    header.insert(header.end(), std::begin(kMetricNames), std::end(kMetricNames));
    rows.push_back(header);
    for (const auto& [name, r] : reports) {
      std::vector<std::string> row{name};
      for (int m = 0; m < 5; ++m) row.push_back(metric(r, m));
      rows.push_back(row);
    }
  }
  return {layout(rows, title), to_csv(rows)};
}

}  // namespace emailad
