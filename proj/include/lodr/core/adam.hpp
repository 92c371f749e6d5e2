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
#include <vector>

#include "lodr/core/params.hpp"

namespace lodr {

struct AdamConfig {
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 5.0;
};

class Adam {
 public:
  Adam(AdamConfig config, const std::vector<ConstParamRef>& params);

  // One update. `grads` must list blocks in the same order and shape as the
  // parameters the optimizer was built for.
  void step(const std::vector<ParamRef>& params, const std::vector<ConstParamRef>& grads);

  std::size_t steps() const { return step_; }

 private:
  AdamConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::size_t step_ = 0;
};

}  // namespace lodr
