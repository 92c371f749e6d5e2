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

#include <cstdint>
#include <string>
#include <vector>

#include "lodr/numerics/matrix.hpp"

namespace lodr {

using TokenId = std::int32_t;

// Non-blank label sequence y_1..y_U. The start symbol is never stored here;
// consumers that need y_0 prepend Vocabulary::start() themselves.
using TokenSequence = std::vector<TokenId>;

// T frames of d-dimensional features, one frame per row.
using FeatureSequence = Matrix;

// One labeled utterance: T x d features and U >= 0 tokens.
struct Utterance {
  std::string id;
  TokenSequence tokens;
  FeatureSequence features;
};

}  // namespace lodr
