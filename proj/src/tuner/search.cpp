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

#include "lodr/tuner/search.hpp"

#include <cmath>
#include <map>

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"

namespace lodr::tuner {

LineSearchResult line_search(const std::function<double(double)>& objective, double lo, double hi,
                             double min_interval, double incumbent_point, double incumbent_value) {
  if (!(lo < hi)) throw InputError("line_search: empty range");
  if (!(min_interval > 0.0)) throw InputError("line_search: min_interval must be positive");
  LineSearchResult result;
  result.point = incumbent_point;
  result.value = incumbent_value;
  std::map<double, double> cache;
  const auto eval = [&](double x) {
    if (const auto it = cache.find(x); it != cache.end()) return it->second;
    double v = 0.0;
    try {
      v = objective(x);
    } catch (const std::exception& e) {
      throw Error("objective failed at " + format_exact(x) + ": " + e.what());
    }
    cache.emplace(x, v);
    result.evaluations.emplace_back(x, v);
    if (v < result.value) {
      result.point = x;
      result.value = v;
      result.improved = true;
    }
    return v;
  };

  while (hi - lo >= min_interval) {
    const double mid = lo + (hi - lo) / 2.0;
    const double q1 = lo + (mid - lo) / 2.0;
    const double q3 = mid + (hi - mid) / 2.0;
    const double fm = eval(mid), f1 = eval(q1), f3 = eval(q3);
    if (f1 < fm && f1 <= f3) {
      hi = mid;
    } else if (f3 < fm && f3 < f1) {
      lo = mid;
    } else if (f1 <= f3) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return result;
}

SearchTrace coordinate_descent(const SearchSpec& spec) {
  const std::size_t P = spec.parameters.size();
  if (spec.initial.size() != P) throw InputError("coordinate_descent: initial point has wrong size");
  if (!spec.objective) throw InputError("coordinate_descent: no objective");
  for (const auto& p : spec.parameters) {
    if (!(p.lo < p.hi)) throw InputError("coordinate_descent: empty range for " + p.name);
    if (!(p.min_interval > 0.0)) throw InputError("coordinate_descent: min_interval must be positive for " + p.name);
  }

  SearchTrace trace;
  trace.final_ranges = spec.parameters;
  std::vector<double> point = spec.initial;
  double value = spec.objective(point);
  trace.entries.push_back({point, value, true});
  std::vector<std::size_t> extended_lo(P, 0), extended_hi(P, 0);

  bool done = P == 0;
  while (!done) {
    if (trace.cycles == spec.max_cycles) {
      trace.truncated = true;
      break;
    }
    ++trace.cycles;
    bool improved = false, extended = false;
    for (std::size_t i = 0; i < P; ++i) {
      ParameterRange& range = trace.final_ranges[i];
      const std::size_t first = trace.entries.size();
      const auto objective = [&](double x) {
        std::vector<double> probe = point;
        probe[i] = x;
        const double v = spec.objective(probe);
        trace.entries.push_back({probe, v, false});
        return v;
      };
      const auto r = line_search(objective, range.lo, range.hi, range.min_interval, point[i], value);
      if (r.improved) {
        point[i] = r.point;
        value = r.value;
        improved = true;
        for (std::size_t e = first; e < trace.entries.size(); ++e) {
          if (trace.entries[e].point[i] == r.point) {
            trace.entries[e].accepted = true;
            break;
          }
        }
      }
      const double width = spec.parameters[i].hi - spec.parameters[i].lo;
      if (point[i] - range.lo <= range.min_interval && extended_lo[i] < spec.max_extensions) {
        range.lo -= width;
        ++extended_lo[i];
        extended = true;
      }
      if (range.hi - point[i] <= range.min_interval && extended_hi[i] < spec.max_extensions) {
        range.hi += width;
        ++extended_hi[i];
        extended = true;
      }
    }
    done = !improved && !extended;
  }
  trace.best_point = point;
  trace.best_value = value;
  return trace;
}

std::size_t evaluation_budget(const SearchTrace& trace) {
  std::size_t per_cycle = 0;
  for (const auto& r : trace.final_ranges) {
    const double rounds = std::ceil(std::log2((r.hi - r.lo) / r.min_interval));
    per_cycle += 2 + 3 * static_cast<std::size_t>(std::max(0.0, rounds));
  }
  return 1 + trace.cycles * per_cycle;
}

}  // namespace lodr::tuner
