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
#include <string_view>

namespace lodr::simd {

// Inner-loop kernels over contiguous double arrays. Matrices are row-major.
// Every table entry has a scalar reference in kernels_scalar.cpp; the AVX2
// table must agree with it up to floating-point reassociation.
struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += A x, A is rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += A^T x
  void (*gemv_t)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                 double* y);
  // A += alpha x y^T, x has `rows` entries and y has `cols`
  void (*ger)(double alpha, const double* x, const double* y, std::size_t rows,
              std::size_t cols, double* a);
};

const KernelTable& scalar_kernels();

// nullptr when the build lacks the variant or the CPU does not support it.
const KernelTable* avx2_kernels();

// Chosen once per process: AVX2 when available, unless the LODR_SIMD
// environment variable is set to "scalar".
const KernelTable& active_kernels();

// Test hook. Passing nullptr restores the automatic choice.
void override_kernels(const KernelTable* table);

}  // namespace lodr::simd
