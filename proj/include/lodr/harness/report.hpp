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

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lodr/harness/config.hpp"
#include "lodr/harness/metrics.hpp"

namespace lodr::harness {

struct ReportRow {
  std::string label;                    // method name or corpus label
  std::optional<double> ilm_perplexity;  // empty for methods without an ILM
  std::optional<FusionWeights> weights;  // empty for none
  bool uses_ilm = false;                // lambda0 column applies
  std::vector<EditCounts> sets;         // one per ReportTable::set_names
};

struct ReportTable {
  std::string title;
  std::string label_header = "Method";
  std::vector<std::string> set_names;  // e.g. dev, test
  std::vector<ReportRow> rows;
  bool show_perplexity = true;
  bool show_average = true;  // avg and Rel % columns
  // Label of the row Rel % is measured against; "" disables the column.
  std::string baseline = "none";
  std::vector<std::string> notes;
};

// Error rate summed over every set of the row (micro-average).
double average_rate(const ReportRow& row);

// Rel % of the row's average against the baseline row, if both exist.
std::optional<double> row_relative(const ReportTable& table, const ReportRow& row);

// Aligned plain-text table with the notes as a footer.
void write_report_text(std::ostream& out, const ReportTable& table);

// Tab-separated twin: header line, then one line per row. Rates use four
// decimals, undefined cells are "-". Counts per set follow the rates.
void write_report_tsv(std::ostream& out, const ReportTable& table);

}  // namespace lodr::harness
