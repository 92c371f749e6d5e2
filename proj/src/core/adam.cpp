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

#include "lodr/core/adam.hpp"

#include <cmath>

#include "lodr/core/error.hpp"

namespace lodr {

Adam::Adam(AdamConfig config, const std::vector<ConstParamRef>& params) : config_(config) {
  for (const auto& p : params) {
    first_.emplace_back(p.value->rows(), p.value->cols());
    second_.emplace_back(p.value->rows(), p.value->cols());
  }
}

void Adam::step(const std::vector<ParamRef>& params, const std::vector<ConstParamRef>& grads) {
  if (params.size() != first_.size() || grads.size() != first_.size()) {
    throw ShapeError("Adam::step: block count mismatch");
  }
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    const double norm = std::sqrt(squared_norm(grads));
    if (!std::isfinite(norm)) throw NumericalError("Adam::step: non-finite gradient norm");
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }
  ++step_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = config_.learning_rate * std::sqrt(correction2) / correction1;

  for (std::size_t k = 0; k < params.size(); ++k) {
    double* w = params[k].value->data();
    const double* g = grads[k].value->data();
    double* m = first_[k].data();
    double* v = second_[k].data();
    const std::size_t n = params[k].value->size();
    if (grads[k].value->size() != n) throw ShapeError("Adam::step: shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = g[i] * scale;
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      w[i] -= lr * m[i] / (std::sqrt(v[i]) + config_.epsilon);
    }
  }
}

}  // namespace lodr
