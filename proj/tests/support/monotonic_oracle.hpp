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
#include <vector>

#include "lodr/numerics/logmath.hpp"
#include "lodr/transducer/transducer.hpp"

namespace lodr::testing {

// Alignment-summed monotonic score of every label sequence, by walking all
// (V + 1)^T per-frame symbol choices. The predictor is rerun from scratch
// for every prefix so nothing is shared with the decoder.
inline std::map<TokenSequence, double> enumerate_monotonic(const transducer::TransducerModel& model,
                                                           const FeatureSequence& x) {
  const Matrix enc = transducer::encoder_projection(model, transducer::encode(model, x));
  const std::size_t T = enc.rows(), V = model.config.num_tokens;
  std::map<TokenSequence, double> out;
  std::vector<std::size_t> choice(T, 0);
  while (true) {
    TokenSequence y;
    double score = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const Matrix g = transducer::predict(model, y);
      const Vector proj = transducer::predictor_projection(model, g.row(y.size()));
      score += transducer::joint_logprobs(model, enc.row(t), proj)[choice[t]];
      if (choice[t] != 0) y.push_back(static_cast<TokenId>(choice[t]));
    }
    auto [it, inserted] = out.try_emplace(y, score);
    if (!inserted) it->second = log_add(it->second, score);
    std::size_t pos = 0;
    while (pos < T && ++choice[pos] > V) choice[pos++] = 0;
    if (pos == T) break;
  }
  return out;
}

}  // namespace lodr::testing
