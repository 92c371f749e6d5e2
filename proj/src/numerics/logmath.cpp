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

#include "lodr/numerics/logmath.hpp"

#include <algorithm>

#include "lodr/core/error.hpp"

namespace lodr {

double logsumexp(std::span<const double> v) {
  if (v.empty()) throw ShapeError("logsumexp: empty input");
  const double peak = *std::max_element(v.begin(), v.end());
  if (peak == kLogZero) return kLogZero;
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - peak);
  return peak + std::log(sum);
}

void log_softmax_inplace(std::span<double> v) {
  const double norm = logsumexp(v);
  for (double& x : v) x -= norm;
}

Vector log_softmax(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  log_softmax_inplace(out);
  return out;
}

}  // namespace lodr
