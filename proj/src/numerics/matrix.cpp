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

#include "lodr/numerics/matrix.hpp"

#include <algorithm>
#include <string>

#include "lodr/core/error.hpp"
#include "lodr/simd/kernels.hpp"

namespace lodr {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions differ (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + ")");
  }
  Matrix out(a.rows(), b.cols());
  const auto& k = simd::active_kernels();
  // Row i of the product is sum_j a(i, j) * row j of b.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const double s = a(i, j);
      if (s != 0.0) k.axpy(s, b.row(j).data(), out.row(i).data(), b.cols());
    }
  }
  return out;
}

void gemv_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw ShapeError("gemv: shape mismatch");
  simd::active_kernels().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

void gemv_t_accumulate(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) throw ShapeError("gemv_t: shape mismatch");
  simd::active_kernels().gemv_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

void outer_accumulate(Matrix& a, double alpha, std::span<const double> x,
                      std::span<const double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) throw ShapeError("ger: shape mismatch");
  simd::active_kernels().ger(alpha, x.data(), y.data(), a.rows(), a.cols(), a.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  return simd::active_kernels().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw ShapeError("axpy: length mismatch");
  simd::active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace lodr
