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

#include <functional>
#include <span>

#include "lodr/numerics/matrix.hpp"

namespace lodr {

// Objective with analytic gradient. When `grad` is non-null it must be
// resized/overwritten with d f / d theta.
using DifferentiableFn = std::function<double(std::span<const double> theta, Vector* grad)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// Throws NumericalError if f(theta) or any probe is non-finite.
double grad_check(const DifferentiableFn& f, std::span<const double> theta, double h = 1e-5);

}  // namespace lodr
