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

#include "lodr/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lodr/core/error.hpp"

namespace lodr {

double grad_check(const DifferentiableFn& f, std::span<const double> theta, double h) {
  Vector point(theta.begin(), theta.end());
  Vector analytic;
  const double value = f(point, &analytic);
  if (!std::isfinite(value)) throw NumericalError("grad_check: f(theta) is not finite");
  if (analytic.size() != point.size()) throw ShapeError("grad_check: gradient size mismatch");

  double worst = 0.0;
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + h;
    const double plus = f(point, nullptr);
    point[i] = saved - h;
    const double minus = f(point, nullptr);
    point[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericalError("grad_check: non-finite probe at coordinate " + std::to_string(i));
    }
    const double numeric = (plus - minus) / (2.0 * h);
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace lodr
