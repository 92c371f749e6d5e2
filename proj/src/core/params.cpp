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

#include "lodr/core/params.hpp"

#include <algorithm>

#include "lodr/core/error.hpp"

namespace lodr {

std::vector<ConstParamRef> as_const(const std::vector<ParamRef>& refs) {
  std::vector<ConstParamRef> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back({r.name, r.value});
  return out;
}

void zero_params(const std::vector<ParamRef>& refs) {
  for (const auto& r : refs) r.value->fill(0.0);
}

void accumulate_params(const std::vector<ParamRef>& dst, const std::vector<ConstParamRef>& src,
                       double scale) {
  if (dst.size() != src.size()) throw ShapeError("accumulate_params: block count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (!dst[i].value->same_shape(*src[i].value)) {
      throw ShapeError("accumulate_params: shape mismatch in block " + dst[i].name);
    }
    axpy(scale, src[i].value->flat(), dst[i].value->flat());
  }
}

double squared_norm(const std::vector<ConstParamRef>& refs) {
  double total = 0.0;
  for (const auto& r : refs) total += dot(r.value->flat(), r.value->flat());
  return total;
}

std::size_t total_size(const std::vector<ConstParamRef>& refs) {
  std::size_t n = 0;
  for (const auto& r : refs) n += r.value->size();
  return n;
}

Vector flatten(const std::vector<ConstParamRef>& refs) {
  Vector out;
  out.reserve(total_size(refs));
  for (const auto& r : refs) out.insert(out.end(), r.value->flat().begin(), r.value->flat().end());
  return out;
}

void unflatten(std::span<const double> flat, const std::vector<ParamRef>& refs) {
  std::size_t offset = 0;
  for (const auto& r : refs) {
    const std::size_t n = r.value->size();
    if (offset + n > flat.size()) throw ShapeError("unflatten: vector too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), n, r.value->data());
    offset += n;
  }
  if (offset != flat.size()) throw ShapeError("unflatten: vector too long");
}

}  // namespace lodr
