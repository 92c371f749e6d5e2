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

#include <string>
#include <vector>

#include "lodr/numerics/matrix.hpp"

namespace lodr {

// A named view of one parameter block of a model. Models enumerate their
// blocks in a fixed order so that gradients, optimizer state and
// checkpoints can be matched positionally.
struct ParamRef {
  std::string name;
  Matrix* value;
};

struct ConstParamRef {
  std::string name;
  const Matrix* value;
};

std::vector<ConstParamRef> as_const(const std::vector<ParamRef>& refs);

// Sets every block to zero.
void zero_params(const std::vector<ParamRef>& refs);

// dst += scale * src, blockwise. Shapes must agree.
void accumulate_params(const std::vector<ParamRef>& dst, const std::vector<ConstParamRef>& src,
                       double scale = 1.0);

double squared_norm(const std::vector<ConstParamRef>& refs);

// Flattens all blocks into one vector (block order, row-major within blocks).
Vector flatten(const std::vector<ConstParamRef>& refs);
inline Vector flatten(const std::vector<ParamRef>& refs) { return flatten(as_const(refs)); }
void unflatten(std::span<const double> flat, const std::vector<ParamRef>& refs);
std::size_t total_size(const std::vector<ConstParamRef>& refs);

}  // namespace lodr
