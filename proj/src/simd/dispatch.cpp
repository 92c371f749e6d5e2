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

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "lodr/simd/kernels.hpp"

namespace lodr::simd {

#if defined(LODR_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

namespace {

std::atomic<const KernelTable*> g_override{nullptr};

bool cpu_has_avx2() {
#if defined(LODR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& automatic_choice() {
  static const KernelTable* chosen = [] {
    const char* env = std::getenv("LODR_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
    if (const KernelTable* wide = avx2_kernels()) return wide;
    return &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(LODR_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  if (const KernelTable* forced = g_override.load(std::memory_order_acquire)) return *forced;
  return automatic_choice();
}

void override_kernels(const KernelTable* table) {
  g_override.store(table, std::memory_order_release);
}

}  // namespace lodr::simd
