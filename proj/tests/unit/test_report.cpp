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

#include <sstream>

#include "doctest.h"
#include "lodr/core/text.hpp"
#include "lodr/harness/report.hpp"

using namespace lodr;
using namespace lodr::harness;

namespace {

ReportTable sample_table() {
  ReportTable t;
  t.title = "sample";
  t.set_names = {"dev", "test"};
  t.rows.push_back({"none", std::nullopt, std::nullopt, false, {{3, 1, 0, 100}, {2, 2, 1, 50}}});
  t.rows.push_back({"sf", std::nullopt, FusionWeights{0.0, 0.5, 1.25}, false, {{2, 0, 0, 100}, {1, 1, 1, 50}}});
  t.rows.push_back({"lodr", 4.5, FusionWeights{-0.25, 0.5, 1.25}, true, {{1, 0, 0, 100}, {1, 0, 1, 50}}});
  t.notes = {"footer"};
  return t;
}

}  // namespace

TEST_CASE("average is the token-weighted aggregate of the sets") {
  const auto t = sample_table();
  CHECK(average_rate(t.rows[0]) == doctest::Approx(100.0 * 9 / 150));
  CHECK(average_rate(t.rows[2]) == doctest::Approx(100.0 * 3 / 150));
  CHECK(*row_relative(t, t.rows[1]) == doctest::Approx((9.0 - 5.0) / 9.0 * 100));
}

TEST_CASE("tsv rows recompute from their counts") {
  const auto t = sample_table();
  std::ostringstream out;
  write_report_tsv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "Method\tILM PPL\tlambda0\tlambda1\tbeta\tdev\ttest\tavg\tRel %\tdev_errors\tdev_ref_tokens\t"
        "test_errors\ttest_ref_tokens");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    for (auto v : split(line, '\t')) f.emplace_back(v);
    rows.push_back(f);
  }
  REQUIRE(rows.size() == 3);
  const double base_avg = *parse_double(rows[0][7]);
  for (const auto& f : rows) {
    REQUIRE(f.size() == 13);
    const double e = *parse_double(f[9]) + *parse_double(f[11]);
    const double n = *parse_double(f[10]) + *parse_double(f[12]);
    CHECK(*parse_double(f[7]) == doctest::Approx(100.0 * e / n).epsilon(1e-4));
    if (f[0] != "none") {
      CHECK(*parse_double(f[8]) == doctest::Approx((base_avg - *parse_double(f[7])) / base_avg * 100).epsilon(0.05));
    }
  }
  CHECK(rows[0][1] == "-");
  CHECK(rows[0][2] == "-");
  CHECK(rows[0][8] == "-");
  CHECK(rows[1][2] == "-");  // sf has no ILM weight
  CHECK(rows[2][1] == "4.50");
  CHECK(rows[2][2] == "-0.25");
}

TEST_CASE("text table aligns its columns") {
  std::ostringstream out;
  write_report_text(out, sample_table());
  std::istringstream in(out.str());
  std::string title, header, rule, row;
  std::getline(in, title);
  std::getline(in, header);
  std::getline(in, rule);
  CHECK(title == "sample");
  CHECK(rule.find_first_not_of('-') == std::string::npos);
  for (int i = 0; i < 3; ++i) {
    std::getline(in, row);
    CHECK(row.size() == header.size());
  }
  std::getline(in, row);
  CHECK(row == "  footer");
}

TEST_CASE("a lone baseline row has an empty relative column") {
  ReportTable t = sample_table();
  t.rows.resize(1);
  std::ostringstream out;
  write_report_tsv(out, t);
  const auto text = out.str();
  const auto second = text.substr(text.find('\n') + 1);
  CHECK(split(second, '\t')[8] == "-");
}

TEST_CASE("zero baseline leaves the relative reduction undefined") {
  ReportTable t = sample_table();
  t.rows[0].sets = {{0, 0, 0, 100}, {0, 0, 0, 50}};
  CHECK_FALSE(row_relative(t, t.rows[1]).has_value());
}
