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

#include "lodr/harness/metrics.hpp"

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"

namespace lodr::harness {
namespace {

struct Cell {
  std::size_t cost = 0;
  std::size_t gaps = 0;  // insertions + deletions
  EditCounts counts;
};

bool better(std::size_t cost, std::size_t gaps, const Cell& c) {
  return cost < c.cost || (cost == c.cost && gaps < c.gaps);
}

}  // namespace

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  reference_length += o.reference_length;
  return *this;
}

EditCounts edit_distance(const TokenSequence& ref, const TokenSequence& hyp) {
  const std::size_t R = ref.size(), H = hyp.size();
  std::vector<Cell> prev(H + 1), cur(H + 1);
  for (std::size_t j = 1; j <= H; ++j) {
    prev[j] = prev[j - 1];
    ++prev[j].cost;
    ++prev[j].gaps;
    ++prev[j].counts.insertions;
  }
  for (std::size_t i = 1; i <= R; ++i) {
    cur[0] = prev[0];
    ++cur[0].cost;
    ++cur[0].gaps;
    ++cur[0].counts.deletions;
    for (std::size_t j = 1; j <= H; ++j) {
      const bool match = ref[i - 1] == hyp[j - 1];
      Cell best = prev[j - 1];
      if (!match) {
        ++best.cost;
        ++best.counts.substitutions;
      }
      if (better(prev[j].cost + 1, prev[j].gaps + 1, best)) {
        best = prev[j];
        ++best.cost;
        ++best.gaps;
        ++best.counts.deletions;
      }
      if (better(cur[j - 1].cost + 1, cur[j - 1].gaps + 1, best)) {
        best = cur[j - 1];
        ++best.cost;
        ++best.gaps;
        ++best.counts.insertions;
      }
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  EditCounts out = prev[H].counts;
  out.reference_length = R;
  return out;
}

EditCounts corpus_errors(const std::map<std::string, TokenSequence>& refs,
                         const std::map<std::string, TokenSequence>& hyps) {
  if (refs.size() != hyps.size()) {
    throw InputError("corpus_errors: " + std::to_string(refs.size()) + " references but " +
                     std::to_string(hyps.size()) + " hypotheses");
  }
  EditCounts total;
  for (const auto& [id, ref] : refs) {
    const auto it = hyps.find(id);
    if (it == hyps.end()) throw InputError("corpus_errors: no hypothesis for utterance " + id);
    total += edit_distance(ref, it->second);
  }
  return total;
}

double error_rate(const EditCounts& counts) {
  if (counts.reference_length == 0) return 0.0;
  return 100.0 * static_cast<double>(counts.errors()) / static_cast<double>(counts.reference_length);
}

double corpus_error_rate(const std::map<std::string, TokenSequence>& refs,
                         const std::map<std::string, TokenSequence>& hyps) {
  return error_rate(corpus_errors(refs, hyps));
}

std::optional<double> relative_reduction(double base, double x) {
  if (base == 0.0) return std::nullopt;
  return (base - x) / base * 100.0;
}

std::string format_relative(std::optional<double> rel) {
  return rel ? format_fixed(*rel, 1) : std::string("-");
}

}  // namespace lodr::harness
