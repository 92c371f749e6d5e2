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

namespace lodr {

// Runs body(worker, index) for index in [0, n) on up to `threads` workers.
// Indices are dealt round-robin, so worker w sees w, w + threads, ... in
// order. The first exception thrown by any body is rethrown after all
// workers finish. threads == 0 means hardware concurrency.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t worker, std::size_t index)>& body);

std::size_t resolve_threads(std::size_t requested, std::size_t work_items);

}  // namespace lodr
