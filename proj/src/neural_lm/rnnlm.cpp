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

#include "lodr/neural_lm/rnnlm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "lodr/core/error.hpp"
#include "lodr/core/parallel.hpp"
#include "lodr/numerics/logmath.hpp"

namespace lodr::neural_lm {
namespace {

struct SentenceCache {
  nn::LstmSequenceCache lstm;
  Matrix top;
  std::vector<TokenId> inputs;
};

void validate(const RecurrentLm& model, const TokenSequence& y) {
  for (TokenId t : y) {
    if (t < 1 || static_cast<std::size_t>(t) > model.config.num_tokens) {
      throw InputError("recurrent LM: token id " + std::to_string(t) + " out of range 1.." +
                       std::to_string(model.config.num_tokens));
    }
  }
}

std::size_t target_index(const RecurrentLm& model, const TokenSequence& y, std::size_t u) {
  return u < y.size() ? static_cast<std::size_t>(y[u]) - 1 : model.eos_index();
}

std::vector<Vector> forward(const RecurrentLm& model, const TokenSequence& y,
                            SentenceCache* cache) {
  validate(model, y);
  const std::size_t steps = y.size() + 1;
  Matrix inputs(steps, model.config.embed_dim);
  std::vector<TokenId> ids(steps);
  ids[0] = model.start_token();
  std::copy(y.begin(), y.end(), ids.begin() + 1);
  for (std::size_t u = 0; u < steps; ++u) {
    const auto row = model.embedding.row(static_cast<std::size_t>(ids[u]));
    std::copy(row.begin(), row.end(), inputs.row(u).begin());
  }
  Matrix top = nn::lstm_stack_forward(model.layers, inputs, cache ? &cache->lstm : nullptr);
  std::vector<Vector> out(steps);
  for (std::size_t u = 0; u < steps; ++u) {
    Vector logits(model.output_bias.flat().begin(), model.output_bias.flat().end());
    gemv_accumulate(model.output, top.row(u), logits);
    log_softmax_inplace(logits);
    out[u] = std::move(logits);
  }
  if (cache != nullptr) {
    cache->top = std::move(top);
    cache->inputs = std::move(ids);
  }
  return out;
}

// Adds d NLL / d params of one sentence into grad and returns the NLL.
double sentence_loss_and_grad(const RecurrentLm& model, const TokenSequence& y,
                              RecurrentLm& grad) {
  SentenceCache cache;
  const auto logprobs = forward(model, y, &cache);
  const std::size_t steps = logprobs.size();
  double nll = 0.0;
  Matrix d_top(steps, model.config.hidden_dim);
  Vector dlogits(model.output_dim());
  for (std::size_t u = 0; u < steps; ++u) {
    const std::size_t target = target_index(model, y, u);
    nll -= logprobs[u][target];
    for (std::size_t k = 0; k < dlogits.size(); ++k) dlogits[k] = std::exp(logprobs[u][k]);
    dlogits[target] -= 1.0;
    outer_accumulate(grad.output, 1.0, dlogits, cache.top.row(u));
    axpy(1.0, dlogits, grad.output_bias.flat());
    gemv_t_accumulate(model.output, dlogits, d_top.row(u));
  }
  const Matrix d_inputs = nn::lstm_stack_backward(model.layers, cache.lstm, d_top, grad.layers);
  for (std::size_t u = 0; u < steps; ++u) {
    axpy(1.0, d_inputs.row(u), grad.embedding.row(static_cast<std::size_t>(cache.inputs[u])));
  }
  return nll;
}

}  // namespace

RecurrentLm RecurrentLm::create(const RecurrentLmConfig& config, std::uint64_t seed) {
  if (config.num_tokens == 0 || config.num_layers == 0 || config.hidden_dim == 0 ||
      config.embed_dim == 0) {
    throw InputError("RecurrentLm: all dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  RecurrentLm m;
  m.config = config;
  m.embedding = Matrix(config.num_tokens + 2, config.embed_dim);
  std::normal_distribution<double> emb(0.0, 0.1);
  for (double& w : m.embedding.flat()) w = emb(rng);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    m.layers.push_back(
        nn::LstmLayer::create(l == 0 ? config.embed_dim : config.hidden_dim, config.hidden_dim, rng));
  }
  m.output = Matrix(config.num_tokens + 1, config.hidden_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  std::uniform_real_distribution<double> out(-scale, scale);
  for (double& w : m.output.flat()) w = out(rng);
  m.output_bias = Matrix(config.num_tokens + 1, 1);
  return m;
}

RecurrentLm RecurrentLm::zeros_like(const RecurrentLm& other) {
  RecurrentLm m;
  m.config = other.config;
  m.embedding = Matrix(other.embedding.rows(), other.embedding.cols());
  for (const auto& l : other.layers) m.layers.push_back(nn::LstmLayer::zeros_like(l));
  m.output = Matrix(other.output.rows(), other.output.cols());
  m.output_bias = Matrix(other.output_bias.rows(), other.output_bias.cols());
  return m;
}

std::vector<ParamRef> RecurrentLm::parameters() {
  std::vector<ParamRef> out{{"embedding", &embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].append_params("lstm" + std::to_string(l), out);
  out.push_back({"output.weight", &output});
  out.push_back({"output.bias", &output_bias});
  return out;
}

std::vector<ConstParamRef> RecurrentLm::parameters() const {
  std::vector<ConstParamRef> out{{"embedding", &embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].append_params("lstm" + std::to_string(l), out);
  out.push_back({"output.weight", &output});
  out.push_back({"output.bias", &output_bias});
  return out;
}

std::vector<Vector> lm_forward(const RecurrentLm& model, const TokenSequence& y) {
  return forward(model, y, nullptr);
}

double lm_sequence_logprob(const RecurrentLm& model, const TokenSequence& y, bool include_eos) {
  const auto logprobs = forward(model, y, nullptr);
  double total = 0.0;
  for (std::size_t u = 0; u < y.size(); ++u) total += logprobs[u][target_index(model, y, u)];
  if (include_eos) total += logprobs[y.size()][model.eos_index()];
  return total;
}

double lm_batch_loss(const RecurrentLm& model, const std::vector<TokenSequence>& batch,
                     RecurrentLm* grad, std::size_t threads) {
  const std::size_t workers = resolve_threads(threads, batch.size());
  std::vector<double> losses(batch.size(), 0.0);
  if (grad == nullptr) {
    parallel_for(batch.size(), workers, [&](std::size_t, std::size_t i) {
      losses[i] = -lm_sequence_logprob(model, batch[i], true);
    });
  } else {
    std::vector<RecurrentLm> partial(workers, RecurrentLm::zeros_like(model));
    parallel_for(batch.size(), workers, [&](std::size_t w, std::size_t i) {
      losses[i] = sentence_loss_and_grad(model, batch[i], partial[w]);
    });
    *grad = std::move(partial[0]);
    for (std::size_t w = 1; w < workers; ++w) {
      accumulate_params(grad->parameters(), std::as_const(partial[w]).parameters());
    }
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

double lm_perplexity(const RecurrentLm& model, const std::vector<TokenSequence>& corpus,
                     std::size_t threads) {
  if (corpus.empty()) throw InputError("lm_perplexity: empty corpus");
  double tokens = 0.0;
  for (const auto& y : corpus) tokens += static_cast<double>(y.size() + 1);
  return std::exp(lm_batch_loss(model, corpus, nullptr, threads) / tokens);
}

LmTrainResult lm_train(RecurrentLm& model, const std::vector<TokenSequence>& corpus,
                       const LmTrainConfig& config) {
  if (corpus.empty()) throw InputError("lm_train: empty corpus");
  if (config.batch_size == 0) throw InputError("lm_train: batch size must be positive");
  LmTrainResult result;
  result.initial_ppl = lm_perplexity(model, corpus, config.threads);
  if (config.epochs == 0) {
    result.final_ppl = result.initial_ppl;
    return result;
  }

  Adam adam(config.adam, std::as_const(model).parameters());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  RecurrentLm grad = RecurrentLm::zeros_like(model);
  std::vector<TokenSequence> batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_nll = 0.0, epoch_tokens = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      double tokens = 0.0;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(corpus[order[i]]);
        tokens += static_cast<double>(corpus[order[i]].size() + 1);
      }
      const double nll = lm_batch_loss(model, batch, &grad, config.threads);
      if (!std::isfinite(nll)) {
        throw NumericalError("lm_train: non-finite loss in epoch " + std::to_string(epoch + 1) +
                             " at batch starting " + std::to_string(start));
      }
      for (auto& p : grad.parameters()) {
        for (double& g : p.value->flat()) g /= tokens;
      }
      adam.step(model.parameters(), std::as_const(grad).parameters());
      epoch_nll += nll;
      epoch_tokens += tokens;
    }
    result.epoch_loss.push_back(epoch_nll / epoch_tokens);
    if (config.on_epoch) config.on_epoch(epoch + 1, result.epoch_loss.back());
  }
  result.final_ppl = lm_perplexity(model, corpus, config.threads);
  if (!std::isfinite(result.final_ppl)) throw NumericalError("lm_train: diverged");
  return result;
}

Checkpoint to_checkpoint(const RecurrentLm& model) {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "recurrent_lm";
  ckpt.meta["num_tokens"] = std::to_string(model.config.num_tokens);
  ckpt.meta["embed_dim"] = std::to_string(model.config.embed_dim);
  ckpt.meta["hidden_dim"] = std::to_string(model.config.hidden_dim);
  ckpt.meta["num_layers"] = std::to_string(model.config.num_layers);
  store_params(ckpt, model.parameters());
  return ckpt;
}

RecurrentLm from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta_value("kind") != "recurrent_lm") {
    throw InputError("checkpoint is not a recurrent LM (kind=" + ckpt.meta_value("kind") + ")");
  }
  RecurrentLmConfig config;
  config.num_tokens = std::stoul(ckpt.meta_value("num_tokens"));
  config.embed_dim = std::stoul(ckpt.meta_value("embed_dim"));
  config.hidden_dim = std::stoul(ckpt.meta_value("hidden_dim"));
  config.num_layers = std::stoul(ckpt.meta_value("num_layers"));
  RecurrentLm model = RecurrentLm::create(config, 0);
  load_params(ckpt, model.parameters());
  return model;
}

void save(const RecurrentLm& model, const std::filesystem::path& path) {
  write_checkpoint(path, to_checkpoint(model));
}

RecurrentLm load(const std::filesystem::path& path) { return from_checkpoint(read_checkpoint(path)); }

}  // namespace lodr::neural_lm
