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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lodr/core/types.hpp"

namespace lodr::harness {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& o);
  bool operator==(const EditCounts&) const = default;
};

// Minimal Levenshtein alignment. Among minimal alignments the one with the
// most substitutions (fewest insertion/deletion pairs) is reported.
EditCounts edit_distance(const TokenSequence& ref, const TokenSequence& hyp);

// Corpus totals over matching id sets; throws InputError when the ids differ.
EditCounts corpus_errors(const std::map<std::string, TokenSequence>& refs,
                         const std::map<std::string, TokenSequence>& hyps);

// 100 * errors / reference tokens; 0 for an empty reference set.
double error_rate(const EditCounts& counts);

double corpus_error_rate(const std::map<std::string, TokenSequence>& refs,
                         const std::map<std::string, TokenSequence>& hyps);

// (base - x) / base * 100; nullopt when base is 0.
std::optional<double> relative_reduction(double base, double x);
// One decimal, or "-" when undefined.
std::string format_relative(std::optional<double> rel);

}  // namespace lodr::harness
