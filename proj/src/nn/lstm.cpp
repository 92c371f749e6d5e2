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

#include "lodr/nn/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "lodr/core/error.hpp"

namespace lodr::nn {
namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LstmLayer LstmLayer::create(std::size_t input_dim, std::size_t hidden_dim,
                            std::mt19937_64& rng) {
  LstmLayer layer{Matrix(4 * hidden_dim, input_dim + hidden_dim), Matrix(4 * hidden_dim, 1)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& w : layer.weight.flat()) w = dist(rng);
  // Forget gate starts open.
  for (std::size_t j = 0; j < hidden_dim; ++j) layer.bias(hidden_dim + j, 0) = 1.0;
  return layer;
}

LstmLayer LstmLayer::zeros_like(const LstmLayer& other) {
  return {Matrix(other.weight.rows(), other.weight.cols()),
          Matrix(other.bias.rows(), other.bias.cols())};
}

void LstmLayer::append_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

void LstmLayer::append_params(const std::string& prefix,
                              std::vector<ConstParamRef>& out) const {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

void lstm_step(const LstmLayer& layer, std::span<const double> x, const LstmState& prev,
               LstmState& next, LstmStepCache* cache) {
  const std::size_t hidden = layer.hidden_dim();
  const std::size_t in = layer.input_dim();
  if (x.size() != in) throw ShapeError("lstm_step: input dimension mismatch");

  Vector input(in + hidden);
  std::copy(x.begin(), x.end(), input.begin());
  std::copy(prev.h.begin(), prev.h.end(), input.begin() + static_cast<std::ptrdiff_t>(in));

  Vector gates(layer.bias.flat().begin(), layer.bias.flat().end());
  gemv_accumulate(layer.weight, input, gates);

  next.h.resize(hidden);
  next.c.resize(hidden);
  Vector tanh_c(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double i = sigmoid(gates[j]);
    const double f = sigmoid(gates[hidden + j]);
    const double g = std::tanh(gates[2 * hidden + j]);
    const double o = sigmoid(gates[3 * hidden + j]);
    gates[j] = i;
    gates[hidden + j] = f;
    gates[2 * hidden + j] = g;
    gates[3 * hidden + j] = o;
    const double c = f * prev.c[j] + i * g;
    tanh_c[j] = std::tanh(c);
    next.c[j] = c;
    next.h[j] = o * tanh_c[j];
  }
  if (cache != nullptr) {
    cache->input = std::move(input);
    cache->gates = std::move(gates);
    cache->c_prev = prev.c;
    cache->tanh_c = std::move(tanh_c);
  }
}

void lstm_step_backward(const LstmLayer& layer, const LstmStepCache& cache,
                        std::span<const double> dh, Vector& dc, LstmLayer& grad,
                        std::span<double> dx, std::span<double> dh_prev) {
  const std::size_t hidden = layer.hidden_dim();
  const std::size_t in = layer.input_dim();
  Vector dz(4 * hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double i = cache.gates[j];
    const double f = cache.gates[hidden + j];
    const double g = cache.gates[2 * hidden + j];
    const double o = cache.gates[3 * hidden + j];
    const double tc = cache.tanh_c[j];
    const double d_o = dh[j] * tc;
    const double dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
    dz[j] = dcj * g * i * (1.0 - i);
    dz[hidden + j] = dcj * cache.c_prev[j] * f * (1.0 - f);
    dz[2 * hidden + j] = dcj * i * (1.0 - g * g);
    dz[3 * hidden + j] = d_o * o * (1.0 - o);
    dc[j] = dcj * f;
  }
  outer_accumulate(grad.weight, 1.0, dz, cache.input);
  axpy(1.0, dz, grad.bias.flat());
  Vector d_input(in + hidden, 0.0);
  gemv_t_accumulate(layer.weight, dz, d_input);
  std::copy_n(d_input.begin(), in, dx.begin());
  std::copy(d_input.begin() + static_cast<std::ptrdiff_t>(in), d_input.end(), dh_prev.begin());
}

Matrix lstm_stack_forward(const std::vector<LstmLayer>& layers, const Matrix& inputs,
                          LstmSequenceCache* cache) {
  const std::size_t steps = inputs.rows();
  if (cache != nullptr) {
    cache->steps.assign(layers.size(), std::vector<LstmStepCache>(steps));
  }
  Matrix current = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LstmLayer& layer = layers[l];
    Matrix out(steps, layer.hidden_dim());
    LstmState state = LstmState::zeros(layer.hidden_dim());
    LstmState next;
    for (std::size_t t = 0; t < steps; ++t) {
      lstm_step(layer, current.row(t), state, next,
                cache != nullptr ? &cache->steps[l][t] : nullptr);
      std::copy(next.h.begin(), next.h.end(), out.row(t).begin());
      std::swap(state, next);
    }
    current = std::move(out);
  }
  return current;
}

Matrix lstm_stack_backward(const std::vector<LstmLayer>& layers, const LstmSequenceCache& cache,
                           const Matrix& d_outputs, std::vector<LstmLayer>& grads) {
  const std::size_t steps = d_outputs.rows();
  Matrix d_above = d_outputs;
  for (std::size_t l = layers.size(); l-- > 0;) {
    const LstmLayer& layer = layers[l];
    const std::size_t hidden = layer.hidden_dim();
    Matrix d_in(steps, layer.input_dim());
    Vector dh(hidden, 0.0);
    Vector dc(hidden, 0.0);
    Vector dh_prev(hidden);
    for (std::size_t t = steps; t-- > 0;) {
      const auto above = d_above.row(t);
      for (std::size_t j = 0; j < hidden; ++j) dh[j] += above[j];
      lstm_step_backward(layer, cache.steps[l][t], dh, dc, grads[l], d_in.row(t), dh_prev);
      dh = dh_prev;
    }
    d_above = std::move(d_in);
  }
  return d_above;
}

}  // namespace lodr::nn
