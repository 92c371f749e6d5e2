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
#include <functional>
#include <string>
#include <vector>

namespace lodr::tuner {

struct ParameterRange {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  double min_interval = 0.1;
};

struct SearchSpec {
  std::vector<ParameterRange> parameters;
  std::vector<double> initial;  // one value per parameter
  std::function<double(const std::vector<double>&)> objective;
  std::size_t max_cycles = 20;
  std::size_t max_extensions = 8;  // per parameter and side
};

struct TraceEntry {
  std::vector<double> point;
  double value = 0.0;
  bool accepted = false;  // became the incumbent
};

struct SearchTrace {
  std::vector<TraceEntry> entries;
  std::vector<double> best_point;
  double best_value = 0.0;
  std::size_t cycles = 0;
  bool truncated = false;  // stopped by max_cycles
  std::vector<ParameterRange> final_ranges;
};

struct LineSearchResult {
  double point = 0.0;
  double value = 0.0;
  bool improved = false;
  std::vector<std::pair<double, double>> evaluations;  // (x, f(x)) in order
};

// Bisection on [lo, hi]: each round probes the midpoint and the midpoints of
// both halves, then keeps the half holding the best probe (the midpoint
// itself keeps the half whose inner probe is lower, left on ties). Rounds
// continue while the width is at least min_interval. Only a strictly better
// value than the incumbent replaces it. Throws InputError for an invalid
// range; objective exceptions are rethrown as Error naming the point.
LineSearchResult line_search(const std::function<double(double)>& objective, double lo, double hi,
                             double min_interval, double incumbent_point, double incumbent_value);

// Cyclic coordinate descent with line_search per coordinate. When a
// coordinate's value ends within min_interval of a range edge, that edge
// moves out by the original width and another cycle follows. Stops after a
// cycle with neither improvement nor extension, or at max_cycles.
SearchTrace coordinate_descent(const SearchSpec& spec);

// Upper bound on objective evaluations for a finished search.
std::size_t evaluation_budget(const SearchTrace& trace);

}  // namespace lodr::tuner
