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

namespace lodr::transducer {

struct TransducerConfig {
  std::size_t num_tokens = 30;  // V regular tokens; joint emits V + 1 (0 = blank)
  std::size_t feature_dim = 16;
  std::size_t encoder_layers = 2;
  std::size_t encoder_dim = 64;
  std::size_t embed_dim = 32;
  std::size_t predictor_layers = 1;
  std::size_t predictor_dim = 64;
  std::size_t joint_dim = 64;
};

// Encoder: LSTM stack over features. Predictor: embedding plus LSTM stack over
// <s> y_1 .. y_U. Joint: W_out tanh(W_enc f + W_pred g + b) + b_out.
struct TransducerModel {
  TransducerConfig config;
  std::vector<nn::LstmLayer> encoder;
  Matrix embedding;  // (V + 2) x E, row = token id, row V + 1 = <s>
  std::vector<nn::LstmLayer> predictor;
  Matrix joint_enc;       // J x He
  Matrix joint_pred;      // J x Hp
  Matrix joint_bias;      // J x 1
  Matrix joint_out;       // (V + 1) x J
  Matrix joint_out_bias;  // (V + 1) x 1

  static TransducerModel create(const TransducerConfig& config, std::uint64_t seed);
  static TransducerModel zeros_like(const TransducerModel& other);

  std::size_t output_dim() const { return config.num_tokens + 1; }
  TokenId start_token() const { return static_cast<TokenId>(config.num_tokens + 1); }

  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
};

// Grid of joint log-probabilities; at(t, u) is over V + 1 symbols.
struct JointLattice {
  std::size_t frames = 0;  // T
  std::size_t labels = 0;  // U
  std::size_t symbols = 0;
  std::vector<double> values;  // T x (U + 1) x symbols

  JointLattice() = default;
  JointLattice(std::size_t t, std::size_t u, std::size_t v, double fill = 0.0)
      : frames(t), labels(u), symbols(v), values(t * (u + 1) * v, fill) {}

  std::span<double> at(std::size_t t, std::size_t u) {
    return {values.data() + (t * (labels + 1) + u) * symbols, symbols};
  }
  std::span<const double> at(std::size_t t, std::size_t u) const {
    return {values.data() + (t * (labels + 1) + u) * symbols, symbols};
  }
};

// Encoder outputs f_1..f_T (T x He). Throws ShapeError on a feature-dimension
// mismatch and InputError for T = 0.
Matrix encode(const TransducerModel& model, const FeatureSequence& x);

// Predictor outputs g_0..g_U ((U + 1) x Hp); row u has consumed <s> y_1 .. y_u.
Matrix predict(const TransducerModel& model, const TokenSequence& y);

// Incremental predictor for decoding.
struct PredictorState {
  nn::LstmState lstm;
  Vector output;  // g
};
PredictorState predictor_start(const TransducerModel& model);
PredictorState predictor_advance(const TransducerModel& model, const PredictorState& state,
                                 TokenId token);

// Joint pre-activations split by input. encoder_projection rows include the
// joint bias; joint_logprobs adds the two halves and applies the output layer.
Matrix encoder_projection(const TransducerModel& model, const Matrix& encoded);
Vector predictor_projection(const TransducerModel& model, std::span<const double> g);
Vector joint_logprobs(const TransducerModel& model, std::span<const double> enc_proj,
                      std::span<const double> pred_proj);

JointLattice compute_lattice(const TransducerModel& model, const FeatureSequence& x,
                             const TokenSequence& y);

// -log P(y | x) over the standard lattice: any number of labels per frame,
// terminated by a blank from the last frame.
double loss_forward(const JointLattice& lattice, const TokenSequence& y);

// d loss / d lattice log-probabilities, same shape as the lattice.
JointLattice loss_backward(const JointLattice& lattice, const TokenSequence& y);

// Loss of one utterance; accumulates d loss / d params into grad when non-null.
double loss_and_grad(const TransducerModel& model, const FeatureSequence& x,
                     const TokenSequence& y, TransducerModel* grad);

// Summed loss over a batch; grad (when non-null) is overwritten.
double batch_loss(const TransducerModel& model, const std::vector<const Utterance*>& batch,
                  TransducerModel* grad, std::size_t threads = 1);

double mean_loss(const TransducerModel& model, const std::vector<Utterance>& data,
                 std::size_t threads = 1);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  // Number of per-epoch checkpoints, best by dev loss, averaged at the end.
  // 0 or 1 keeps the final parameters.
  std::size_t average_best = 10;
  std::function<void(std::size_t epoch, double train_loss, double dev_loss)> on_epoch;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean per-utterance loss on train
  std::vector<double> dev_loss;    // empty without a dev set
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<std::size_t> averaged_epochs;
};

// Throws NumericalError when a batch loss becomes non-finite.
TrainResult train_transducer(TransducerModel& model, const std::vector<Utterance>& train,
                             const std::vector<Utterance>& dev, const TrainConfig& config);

// Elementwise mean; throws ShapeError on architecture mismatch.
TransducerModel average_checkpoints(const std::vector<TransducerModel>& models);

// Internal LM: joint with the acoustic input zeroed, blank dropped and the V
// token logits renormalized. Entry k - 1 scores token k.
Vector ilme_logprobs(const TransducerModel& model, const TokenSequence& prefix);

// Sum over u = 1..U of log P_ilm(y_u | y_1 .. y_{u-1}); 0 for an empty sequence.
double ilme_sequence_logprob(const TransducerModel& model, const TokenSequence& y);

// Frame-synchronous greedy search emitting at most one label per frame.
TokenSequence greedy_decode(const TransducerModel& model, const FeatureSequence& x);

Checkpoint to_checkpoint(const TransducerModel& model);
TransducerModel from_checkpoint(const Checkpoint& ckpt);
void save(const TransducerModel& model, const std::filesystem::path& path);
TransducerModel load(const std::filesystem::path& path);

}  // namespace lodr::transducer
