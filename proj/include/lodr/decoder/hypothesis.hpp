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

#include <map>
#include <string>
#include <vector>

#include "lodr/core/types.hpp"

namespace lodr::decoder {

struct Hypothesis {
  TokenSequence tokens;
  double logp_rnnt = 0.0;
  // Log-scores by scorer id ("elm", "dr_ilm", ...). Set once, never overwritten.
  std::map<std::string, double> cached_scores;

  std::size_t length() const { return tokens.size(); }
};

struct NBestList {
  std::string utterance_id;
  std::vector<Hypothesis> hypotheses;  // first-pass order
};

// Deterministic tie-break: shorter first, then lexicographic token ids.
inline bool tie_break_less(const TokenSequence& a, const TokenSequence& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace lodr::decoder
