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

#include <random>

#include "doctest.h"
#include "lodr/core/error.hpp"
#include "lodr/harness/metrics.hpp"

using namespace lodr;
using namespace lodr::harness;

namespace {

// Plain Levenshtein distance, no tie handling.
std::size_t levenshtein(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

}  // namespace

TEST_CASE("edit distance examples") {
  CHECK(edit_distance({1, 2, 3}, {1, 2, 3}) == EditCounts{0, 0, 0, 3});
  CHECK(edit_distance({1, 2, 3}, {1, 9, 3}) == EditCounts{1, 0, 0, 3});
  CHECK(edit_distance({1, 2, 3, 4}, {2, 3}) == EditCounts{0, 2, 0, 4});
  CHECK(edit_distance({}, {5, 6}) == EditCounts{0, 0, 2, 0});
  // One substitution rather than a deletion plus an insertion.
  CHECK(edit_distance({1, 2}, {2, 3}).errors() == 2);
  CHECK(edit_distance({7}, {8}) == EditCounts{1, 0, 0, 1});
}

TEST_CASE("edit distance matches Levenshtein and prefers substitutions") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    TokenSequence a(rng() % 7), b(rng() % 7);
    for (auto& t : a) t = static_cast<TokenId>(1 + rng() % 3);
    for (auto& t : b) t = static_cast<TokenId>(1 + rng() % 3);
    const auto e = edit_distance(a, b);
    CHECK(e.errors() == levenshtein(a, b));
    CHECK(e.deletions + e.substitutions <= a.size());
    CHECK(e.insertions + e.substitutions <= b.size());
    // Gaps are never fewer than the length difference.
    const std::size_t gap = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    CHECK(e.deletions + e.insertions >= gap);
  }
}

TEST_CASE("corpus error rate") {
  const std::map<std::string, TokenSequence> refs{{"a", {1, 2, 3, 4}}};
  CHECK(corpus_error_rate(refs, refs) == 0.0);
  CHECK(corpus_error_rate(refs, {{"a", {1, 2, 9, 4}}}) == 25.0);
  CHECK_THROWS_AS(corpus_error_rate(refs, {{"b", {1}}}), InputError);
  CHECK_THROWS_AS(corpus_error_rate(refs, {}), InputError);

  std::mt19937_64 rng(2);
  std::map<std::string, TokenSequence> r, h;
  std::size_t errors = 0, n = 0;
  for (int i = 0; i < 40; ++i) {
    TokenSequence a(1 + rng() % 6), b(rng() % 6);
    for (auto& t : a) t = static_cast<TokenId>(1 + rng() % 4);
    for (auto& t : b) t = static_cast<TokenId>(1 + rng() % 4);
    const std::string id = "u" + std::to_string(i);
    r[id] = a;
    h[id] = b;
    errors += edit_distance(a, b).errors();
    n += a.size();
  }
  CHECK(corpus_error_rate(r, h) == doctest::Approx(100.0 * static_cast<double>(errors) / static_cast<double>(n)));
}

TEST_CASE("relative reduction") {
  CHECK(std::abs(*relative_reduction(3.81, 3.04) - 20.2) <= 0.05);
  CHECK(std::abs(*relative_reduction(14.05, 12.22) - 13.0) <= 0.05);
  CHECK(*relative_reduction(5.0, 5.0) == 0.0);
  CHECK(!relative_reduction(0.0, 1.0));
  CHECK(format_relative(relative_reduction(3.81, 3.04)) == "20.2");
  CHECK(format_relative(relative_reduction(14.05, 12.22)) == "13.0");
  CHECK(format_relative(std::nullopt) == "-");
}
