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

#include <vector>

#include "lodr/numerics/logmath.hpp"
#include "lodr/transducer/transducer.hpp"

namespace lodr::testing {

// Log-probability of every standard-topology alignment of y, enumerated
// explicitly: a walk from (0, 0) to (T - 1, U) plus the final blank.
inline void enumerate_alignments(const transducer::JointLattice& lat, const TokenSequence& y,
                                 std::size_t t, std::size_t u, double acc,
                                 std::vector<double>& out) {
  const std::size_t T = lat.frames, U = y.size();
  if (t == T - 1 && u == U) {
    out.push_back(acc + lat.at(t, u)[0]);
    return;
  }
  if (t + 1 < T) enumerate_alignments(lat, y, t + 1, u, acc + lat.at(t, u)[0], out);
  if (u < U) {
    enumerate_alignments(lat, y, t, u + 1, acc + lat.at(t, u)[static_cast<std::size_t>(y[u])], out);
  }
}

inline double enumerated_loss(const transducer::JointLattice& lat, const TokenSequence& y) {
  std::vector<double> paths;
  enumerate_alignments(lat, y, 0, 0, 0.0, paths);
  return -logsumexp(paths);
}

}  // namespace lodr::testing
