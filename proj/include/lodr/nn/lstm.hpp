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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lodr/core/params.hpp"
#include "lodr/numerics/matrix.hpp"

namespace lodr::nn {

// Gated recurrent cell with input, forget and output gates.
//
//   z = W [x; h_prev] + b          gate blocks in order i, f, g, o
//   c = sigmoid(z_f) * c_prev + sigmoid(z_i) * tanh(z_g)
//   h = sigmoid(z_o) * tanh(c)
struct LstmLayer {
  Matrix weight;  // 4H x (in + H)
  Matrix bias;    // 4H x 1

  static LstmLayer create(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng);
  static LstmLayer zeros_like(const LstmLayer& other);

  std::size_t hidden_dim() const { return bias.rows() / 4; }
  std::size_t input_dim() const { return weight.cols() - hidden_dim(); }

  void append_params(const std::string& prefix, std::vector<ParamRef>& out);
  void append_params(const std::string& prefix, std::vector<ConstParamRef>& out) const;
};

struct LstmState {
  Vector h;
  Vector c;
  static LstmState zeros(std::size_t hidden_dim) {
    return {Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)};
  }
};

// Everything the backward pass of one step needs.
struct LstmStepCache {
  Vector input;   // [x; h_prev]
  Vector gates;   // activated i, f, g, o
  Vector c_prev;
  Vector tanh_c;
};

void lstm_step(const LstmLayer& layer, std::span<const double> x, const LstmState& prev,
               LstmState& next, LstmStepCache* cache = nullptr);

// Backward through one step. `dc` holds dL/dc_t on entry and dL/dc_{t-1} on
// exit. dx and dh_prev are overwritten.
void lstm_step_backward(const LstmLayer& layer, const LstmStepCache& cache,
                        std::span<const double> dh, Vector& dc, LstmLayer& grad,
                        std::span<double> dx, std::span<double> dh_prev);

// Multi-layer stack run over a whole sequence from zero initial state.
struct LstmSequenceCache {
  std::vector<std::vector<LstmStepCache>> steps;  // [layer][t]
};

// inputs: T x in. Returns T x H of the top layer.
Matrix lstm_stack_forward(const std::vector<LstmLayer>& layers, const Matrix& inputs,
                          LstmSequenceCache* cache = nullptr);

// d_outputs: T x H of the top layer. Accumulates into grads and returns
// dL/d inputs (T x in).
Matrix lstm_stack_backward(const std::vector<LstmLayer>& layers, const LstmSequenceCache& cache,
                           const Matrix& d_outputs, std::vector<LstmLayer>& grads);

}  // namespace lodr::nn
