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
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "lodr/core/adam.hpp"
#include "lodr/core/checkpoint.hpp"
#include "lodr/core/params.hpp"
#include "lodr/core/types.hpp"
#include "lodr/nn/lstm.hpp"

namespace lodr::neural_lm {

struct RecurrentLmConfig {
  std::size_t num_tokens = 30;  // V regular tokens
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t num_layers = 2;
};

// Token-level recurrent LM. Inputs are <s> and the regular tokens; outputs
// are the V regular tokens (row t - 1 for token t) followed by </s> (row V).
struct RecurrentLm {
  RecurrentLmConfig config;
  Matrix embedding;  // (V + 2) x E, row = token id, row V + 1 = <s>
  std::vector<nn::LstmLayer> layers;
  Matrix output;       // (V + 1) x H
  Matrix output_bias;  // (V + 1) x 1

  static RecurrentLm create(const RecurrentLmConfig& config, std::uint64_t seed);
  static RecurrentLm zeros_like(const RecurrentLm& other);

  std::size_t output_dim() const { return config.num_tokens + 1; }
  TokenId start_token() const { return static_cast<TokenId>(config.num_tokens + 1); }
  std::size_t eos_index() const { return config.num_tokens; }

  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
};

// Position u holds log P(. | y_0 .. y_u) with y_0 = <s>; U + 1 vectors over
// output_dim() outcomes. Throws InputError for ids outside 1..V.
std::vector<Vector> lm_forward(const RecurrentLm& model, const TokenSequence& y);

double lm_sequence_logprob(const RecurrentLm& model, const TokenSequence& y, bool include_eos);

// Summed token negative log-likelihood (end marker included) of a batch.
// When grad is non-null it receives d loss / d params (overwritten).
double lm_batch_loss(const RecurrentLm& model, const std::vector<TokenSequence>& batch,
                     RecurrentLm* grad, std::size_t threads = 1);

double lm_perplexity(const RecurrentLm& model, const std::vector<TokenSequence>& corpus,
                     std::size_t threads = 1);

struct LmTrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 16;
  AdamConfig adam{};
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  // Optional per-epoch progress callback: (epoch, mean token cross-entropy).
  std::function<void(std::size_t, double)> on_epoch;
};

struct LmTrainResult {
  std::vector<double> epoch_loss;  // mean token cross-entropy per epoch
  double initial_ppl = 0.0;
  double final_ppl = 0.0;
};

// Throws NumericalError if the loss becomes non-finite.
LmTrainResult lm_train(RecurrentLm& model, const std::vector<TokenSequence>& corpus,
                       const LmTrainConfig& config);

Checkpoint to_checkpoint(const RecurrentLm& model);
RecurrentLm from_checkpoint(const Checkpoint& ckpt);
void save(const RecurrentLm& model, const std::filesystem::path& path);
RecurrentLm load(const std::filesystem::path& path);

}  // namespace lodr::neural_lm
