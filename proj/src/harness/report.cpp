// Copyright 2026 The LODR Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lodr/harness/report.hpp"

#include <algorithm>
#include <ostream>

#include "lodr/core/text.hpp"

namespace lodr::harness {
namespace {

std::string weight_cell(const ReportRow& row, double FusionWeights::*field, bool is_lambda0) {
  if (!row.weights || (is_lambda0 && !row.uses_ilm)) return "-";
  return format_exact(row.weights.value().*field);
}

struct Layout {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;
};

Layout layout(const ReportTable& table, int decimals) {
  Layout l;
  l.header.push_back(table.label_header);
  if (table.show_perplexity) l.header.push_back("ILM PPL");
  for (const char* w : {"lambda0", "lambda1", "beta"}) l.header.push_back(w);
  for (const auto& s : table.set_names) l.header.push_back(s);
  const bool rel = table.show_average && !table.baseline.empty();
  if (table.show_average) l.header.push_back("avg");
  if (rel) l.header.push_back("Rel %");
  for (const auto& row : table.rows) {
    std::vector<std::string> c{row.label};
    if (table.show_perplexity) c.push_back(row.ilm_perplexity ? format_fixed(*row.ilm_perplexity, 2) : "-");
    c.push_back(weight_cell(row, &FusionWeights::lambda0, true));
    c.push_back(weight_cell(row, &FusionWeights::lambda1, false));
    c.push_back(weight_cell(row, &FusionWeights::beta, false));
    for (const auto& s : row.sets) c.push_back(format_fixed(error_rate(s), decimals));
    if (table.show_average) c.push_back(format_fixed(average_rate(row), decimals));
    if (rel) c.push_back(row.label == table.baseline ? "-" : format_relative(row_relative(table, row)));
    l.cells.push_back(std::move(c));
  }
  return l;
}

}  // namespace

double average_rate(const ReportRow& row) {
  EditCounts total;
  for (const auto& s : row.sets) total += s;
  return error_rate(total);
}

std::optional<double> row_relative(const ReportTable& table, const ReportRow& row) {
  const auto base = std::find_if(table.rows.begin(), table.rows.end(),
                                 [&](const ReportRow& r) { return r.label == table.baseline; });
  if (base == table.rows.end()) return std::nullopt;
  return relative_reduction(average_rate(*base), average_rate(row));
}

void write_report_text(std::ostream& out, const ReportTable& table) {
  const Layout l = layout(table, 2);
  std::vector<std::size_t> width(l.header.size());
  for (std::size_t i = 0; i < l.header.size(); ++i) width[i] = l.header[i].size();
  for (const auto& row : l.cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  const auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::size_t pad = width[i] - cells[i].size();
      s += i == 0 ? cells[i] + std::string(pad, ' ') : std::string(pad, ' ') + cells[i];
      if (i + 1 < cells.size()) s += " | ";
    }
    out << s << '\n';
    return s.size();
  };
  out << table.title << '\n';
  const std::size_t w = line(l.header);
  out << std::string(w, '-') << '\n';
  for (const auto& row : l.cells) line(row);
  for (const auto& note : table.notes) out << "  " << note << '\n';
}

void write_report_tsv(std::ostream& out, const ReportTable& table) {
  const Layout l = layout(table, 4);
  for (std::size_t i = 0; i < l.header.size(); ++i) out << (i ? "\t" : "") << l.header[i];
  for (const auto& s : table.set_names) out << '\t' << s << "_errors\t" << s << "_ref_tokens";
  out << '\n';
  for (std::size_t r = 0; r < l.cells.size(); ++r) {
    for (std::size_t i = 0; i < l.cells[r].size(); ++i) out << (i ? "\t" : "") << l.cells[r][i];
    for (const auto& s : table.rows[r].sets) out << '\t' << s.errors() << '\t' << s.reference_length;
    out << '\n';
  }
}

}  // namespace lodr::harness
