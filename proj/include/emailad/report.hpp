#pragma once

#include <string>
#include <utility>
#include <vector>

#include "emailad/eval.hpp"

namespace emailad {

// binary: one row per algorithm. stacking: one row per base-learner set.
// oneclass: one row per metric, one column per report.
enum class TableStyle { Binary, Stacking, OneClass };

struct RenderedTable {
  std::string text;
  std::string csv;
};

using NamedReport = std::pair<std::string, EvalReport>;

// Percentages for everything but AUC, four decimals throughout; "-" for an
// absent AUC.
RenderedTable render_table(const std::vector<NamedReport>& reports, TableStyle style, const std::string& title = {});

std::string format_percent(double v);
std::string format_auc(const std::optional<double>& v);

}  // namespace emailad
