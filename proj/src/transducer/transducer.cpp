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

#include "lodr/transducer/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>

#include "lodr/core/error.hpp"
#include "lodr/core/parallel.hpp"
#include "lodr/numerics/logmath.hpp"

namespace lodr::transducer {
namespace {

std::string grid_point(std::size_t t, std::size_t u) {
  return "(t=" + std::to_string(t) + ", u=" + std::to_string(u) + ")";
}

void validate_tokens(const TransducerModel& model, const TokenSequence& y) {
  for (TokenId t : y) {
    if (t < 1 || static_cast<std::size_t>(t) > model.config.num_tokens) {
      throw InputError("transducer: token id " + std::to_string(t) + " out of range 1.." +
                       std::to_string(model.config.num_tokens));
    }
  }
}

void validate_features(const TransducerModel& model, const FeatureSequence& x) {
  if (x.rows() == 0) throw InputError("transducer: feature sequence has no frames");
  if (x.cols() != model.config.feature_dim) {
    throw ShapeError("transducer: feature dimension " + std::to_string(x.cols()) +
                     ", model expects " + std::to_string(model.config.feature_dim));
  }
}

void check_lattice(const JointLattice& lattice, const TokenSequence& y) {
  if (lattice.frames == 0) throw InputError("transducer loss: lattice has no frames");
  if (lattice.labels != y.size()) {
    throw ContractError("transducer loss: lattice built for " + std::to_string(lattice.labels) +
                        " labels, sequence has " + std::to_string(y.size()));
  }
  for (TokenId t : y) {
    if (t < 1 || static_cast<std::size_t>(t) >= lattice.symbols) {
      throw InputError("transducer loss: token id " + std::to_string(t) + " out of range");
    }
  }
}

Matrix predictor_inputs(const TransducerModel& model, const TokenSequence& y) {
  Matrix inputs(y.size() + 1, model.config.embed_dim);
  for (std::size_t u = 0; u <= y.size(); ++u) {
    const auto id = static_cast<std::size_t>(u == 0 ? model.start_token() : y[u - 1]);
    const auto row = model.embedding.row(id);
    std::copy(row.begin(), row.end(), inputs.row(u).begin());
  }
  return inputs;
}

Matrix project_rows(const Matrix& weight, const Matrix* bias, const Matrix& rows) {
  Matrix out(rows.rows(), weight.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    auto dst = out.row(r);
    if (bias != nullptr) std::copy(bias->flat().begin(), bias->flat().end(), dst.begin());
    gemv_accumulate(weight, rows.row(r), dst);
  }
  return out;
}

// Forward DP over the lattice; alpha is T x (U + 1).
Matrix forward_variables(const JointLattice& lat, const TokenSequence& y) {
  const std::size_t T = lat.frames, U = lat.labels;
  Matrix alpha(T, U + 1, kLogZero);
  alpha(0, 0) = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double a = kLogZero;
      if (t > 0) a = alpha(t - 1, u) + lat.at(t - 1, u)[0];
      if (u > 0) a = log_add(a, alpha(t, u - 1) + lat.at(t, u - 1)[static_cast<std::size_t>(y[u - 1])]);
      alpha(t, u) = a;
    }
  }
  return alpha;
}

// beta(t, u): log-probability of finishing from grid point (t, u), final blank included.
Matrix backward_variables(const JointLattice& lat, const TokenSequence& y) {
  const std::size_t T = lat.frames, U = lat.labels;
  Matrix beta(T, U + 1, kLogZero);
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t u = U + 1; u-- > 0;) {
      const auto lp = lat.at(t, u);
      if (t == T - 1 && u == U) {
        beta(t, u) = lp[0];
        continue;
      }
      double b = kLogZero;
      if (t + 1 < T) b = lp[0] + beta(t + 1, u);
      if (u < U) b = log_add(b, lp[static_cast<std::size_t>(y[u])] + beta(t, u + 1));
      beta(t, u) = b;
    }
  }
  return beta;
}

struct ForwardCache {
  nn::LstmSequenceCache encoder;
  nn::LstmSequenceCache predictor;
  Matrix encoded;    // T x He
  Matrix predicted;  // (U + 1) x Hp
  Matrix enc_proj;   // T x J
  Matrix pred_proj;  // (U + 1) x J
  std::vector<double> hidden;  // T x (U + 1) x J, tanh activations
};

JointLattice lattice_forward(const TransducerModel& model, const FeatureSequence& x,
                             const TokenSequence& y, ForwardCache* cache) {
  validate_features(model, x);
  validate_tokens(model, y);
  const std::size_t T = x.rows(), U = y.size(), J = model.config.joint_dim;
  Matrix encoded = nn::lstm_stack_forward(model.encoder, x, cache ? &cache->encoder : nullptr);
  Matrix predicted = nn::lstm_stack_forward(model.predictor, predictor_inputs(model, y),
                                            cache ? &cache->predictor : nullptr);
  Matrix enc_proj = project_rows(model.joint_enc, &model.joint_bias, encoded);
  Matrix pred_proj = project_rows(model.joint_pred, nullptr, predicted);

  JointLattice lat(T, U, model.output_dim());
  std::vector<double> hidden;
  if (cache != nullptr) hidden.resize(T * (U + 1) * J);
  Vector h(J);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const auto ef = enc_proj.row(t);
      const auto pg = pred_proj.row(u);
      for (std::size_t j = 0; j < J; ++j) h[j] = std::tanh(ef[j] + pg[j]);
      auto out = lat.at(t, u);
      std::copy(model.joint_out_bias.flat().begin(), model.joint_out_bias.flat().end(), out.begin());
      gemv_accumulate(model.joint_out, h, out);
      log_softmax_inplace(out);
      if (cache != nullptr) std::copy(h.begin(), h.end(), hidden.begin() + (t * (U + 1) + u) * J);
    }
  }
  if (cache != nullptr) {
    cache->encoded = std::move(encoded);
    cache->predicted = std::move(predicted);
    cache->enc_proj = std::move(enc_proj);
    cache->pred_proj = std::move(pred_proj);
    cache->hidden = std::move(hidden);
  }
  return lat;
}

Vector ilm_distribution(const TransducerModel& model, std::span<const double> g) {
  const std::size_t J = model.config.joint_dim;
  Vector h(model.joint_bias.flat().begin(), model.joint_bias.flat().end());
  gemv_accumulate(model.joint_pred, g, h);
  for (std::size_t j = 0; j < J; ++j) h[j] = std::tanh(h[j]);
  Vector logits(model.joint_out_bias.flat().begin(), model.joint_out_bias.flat().end());
  gemv_accumulate(model.joint_out, h, logits);
  Vector tokens(logits.begin() + 1, logits.end());
  log_softmax_inplace(tokens);
  return tokens;
}

template <typename Refs>
Refs collect(auto& m) {
  Refs out;
  for (std::size_t l = 0; l < m.encoder.size(); ++l) m.encoder[l].append_params("encoder" + std::to_string(l), out);
  out.push_back({"embedding", &m.embedding});
  for (std::size_t l = 0; l < m.predictor.size(); ++l) m.predictor[l].append_params("predictor" + std::to_string(l), out);
  out.push_back({"joint.enc", &m.joint_enc});
  out.push_back({"joint.pred", &m.joint_pred});
  out.push_back({"joint.bias", &m.joint_bias});
  out.push_back({"joint.out", &m.joint_out});
  out.push_back({"joint.out_bias", &m.joint_out_bias});
  return out;
}

bool same_architecture(const TransducerModel& a, const TransducerModel& b) {
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].name != pb[i].name || !pa[i].value->same_shape(*pb[i].value)) return false;
  }
  return true;
}

}  // namespace

TransducerModel TransducerModel::create(const TransducerConfig& c, std::uint64_t seed) {
  if (c.num_tokens == 0 || c.feature_dim == 0 || c.encoder_layers == 0 || c.encoder_dim == 0 ||
      c.embed_dim == 0 || c.predictor_layers == 0 || c.predictor_dim == 0 || c.joint_dim == 0) {
    throw InputError("TransducerModel: all dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  TransducerModel m;
  m.config = c;
  for (std::size_t l = 0; l < c.encoder_layers; ++l) {
    m.encoder.push_back(nn::LstmLayer::create(l == 0 ? c.feature_dim : c.encoder_dim, c.encoder_dim, rng));
  }
  m.embedding = Matrix(c.num_tokens + 2, c.embed_dim);
  std::normal_distribution<double> emb(0.0, 0.1);
  for (double& w : m.embedding.flat()) w = emb(rng);
  for (std::size_t l = 0; l < c.predictor_layers; ++l) {
    m.predictor.push_back(nn::LstmLayer::create(l == 0 ? c.embed_dim : c.predictor_dim, c.predictor_dim, rng));
  }
  const auto uniform = [&](Matrix& w, std::size_t fan_in) {
    const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> d(-s, s);
    for (double& v : w.flat()) v = d(rng);
  };
  m.joint_enc = Matrix(c.joint_dim, c.encoder_dim);
  uniform(m.joint_enc, c.encoder_dim);
  m.joint_pred = Matrix(c.joint_dim, c.predictor_dim);
  uniform(m.joint_pred, c.predictor_dim);
  m.joint_bias = Matrix(c.joint_dim, 1);
  m.joint_out = Matrix(c.num_tokens + 1, c.joint_dim);
  uniform(m.joint_out, c.joint_dim);
  m.joint_out_bias = Matrix(c.num_tokens + 1, 1);
  return m;
}

TransducerModel TransducerModel::zeros_like(const TransducerModel& other) {
  TransducerModel m = other;
  zero_params(m.parameters());
  return m;
}

std::vector<ParamRef> TransducerModel::parameters() { return collect<std::vector<ParamRef>>(*this); }

std::vector<ConstParamRef> TransducerModel::parameters() const {
  return collect<std::vector<ConstParamRef>>(*this);
}

Matrix encode(const TransducerModel& model, const FeatureSequence& x) {
  validate_features(model, x);
  return nn::lstm_stack_forward(model.encoder, x);
}

Matrix predict(const TransducerModel& model, const TokenSequence& y) {
  validate_tokens(model, y);
  return nn::lstm_stack_forward(model.predictor, predictor_inputs(model, y));
}

PredictorState predictor_start(const TransducerModel& model) {
  PredictorState s;
  s.lstm = nn::LstmState::zeros(0);
  return predictor_advance(model, s, model.start_token());
}

PredictorState predictor_advance(const TransducerModel& model, const PredictorState& state,
                                 TokenId token) {
  if (token < 1 || token > model.start_token()) {
    throw InputError("predictor: token id " + std::to_string(token) + " out of range");
  }
  // The stacked state is kept layer after layer in lstm.h / lstm.c.
  const std::size_t H = model.config.predictor_dim, L = model.predictor.size();
  const bool fresh = state.lstm.h.empty();
  PredictorState next;
  next.lstm = nn::LstmState::zeros(H * L);
  Vector input(model.embedding.row(static_cast<std::size_t>(token)).begin(),
               model.embedding.row(static_cast<std::size_t>(token)).end());
  for (std::size_t l = 0; l < L; ++l) {
    nn::LstmState prev = nn::LstmState::zeros(H);
    if (!fresh) {
      std::copy_n(state.lstm.h.begin() + l * H, H, prev.h.begin());
      std::copy_n(state.lstm.c.begin() + l * H, H, prev.c.begin());
    }
    nn::LstmState out;
    nn::lstm_step(model.predictor[l], input, prev, out);
    std::copy(out.h.begin(), out.h.end(), next.lstm.h.begin() + l * H);
    std::copy(out.c.begin(), out.c.end(), next.lstm.c.begin() + l * H);
    input = std::move(out.h);
  }
  next.output = std::move(input);
  return next;
}

Matrix encoder_projection(const TransducerModel& model, const Matrix& encoded) {
  return project_rows(model.joint_enc, &model.joint_bias, encoded);
}

Vector predictor_projection(const TransducerModel& model, std::span<const double> g) {
  Vector out(model.config.joint_dim, 0.0);
  gemv_accumulate(model.joint_pred, g, out);
  return out;
}

Vector joint_logprobs(const TransducerModel& model, std::span<const double> enc_proj,
                      std::span<const double> pred_proj) {
  Vector h(model.config.joint_dim);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = std::tanh(enc_proj[j] + pred_proj[j]);
  Vector out(model.joint_out_bias.flat().begin(), model.joint_out_bias.flat().end());
  gemv_accumulate(model.joint_out, h, out);
  log_softmax_inplace(out);
  return out;
}

JointLattice compute_lattice(const TransducerModel& model, const FeatureSequence& x,
                             const TokenSequence& y) {
  return lattice_forward(model, x, y, nullptr);
}

double loss_forward(const JointLattice& lattice, const TokenSequence& y) {
  check_lattice(lattice, y);
  const Matrix alpha = forward_variables(lattice, y);
  const std::size_t T = lattice.frames, U = lattice.labels;
  return -(alpha(T - 1, U) + lattice.at(T - 1, U)[0]);
}

JointLattice loss_backward(const JointLattice& lattice, const TokenSequence& y) {
  check_lattice(lattice, y);
  const std::size_t T = lattice.frames, U = lattice.labels;
  const Matrix alpha = forward_variables(lattice, y);
  const Matrix beta = backward_variables(lattice, y);
  const double logp = alpha(T - 1, U) + lattice.at(T - 1, U)[0];
  if (!std::isfinite(logp)) {
    throw NumericalError("transducer loss: non-finite log-likelihood at " + grid_point(T - 1, U));
  }
  JointLattice grad(T, U, lattice.symbols);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const auto lp = lattice.at(t, u);
      auto g = grad.at(t, u);
      double after_blank = kLogZero;
      if (t + 1 < T) after_blank = beta(t + 1, u);
      else if (u == U) after_blank = 0.0;
      if (after_blank != kLogZero) g[0] = -std::exp(alpha(t, u) + lp[0] + after_blank - logp);
      if (u < U) {
        const auto k = static_cast<std::size_t>(y[u]);
        g[k] = -std::exp(alpha(t, u) + lp[k] + beta(t, u + 1) - logp);
      }
      if (!std::isfinite(g[0]) || (u < U && !std::isfinite(g[static_cast<std::size_t>(y[u])]))) {
        throw NumericalError("transducer loss: non-finite gradient at " + grid_point(t, u));
      }
    }
  }
  return grad;
}

double loss_and_grad(const TransducerModel& model, const FeatureSequence& x,
                     const TokenSequence& y, TransducerModel* grad) {
  if (grad == nullptr) return loss_forward(compute_lattice(model, x, y), y);
  ForwardCache cache;
  const JointLattice lat = lattice_forward(model, x, y, &cache);
  const double loss = loss_forward(lat, y);
  const JointLattice dlat = loss_backward(lat, y);
  const std::size_t T = lat.frames, U = lat.labels, J = model.config.joint_dim;
  const std::size_t V1 = model.output_dim();

  Matrix d_enc_proj(T, J), d_pred_proj(U + 1, J);
  Vector dlogits(V1), dh(J);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const auto g = dlat.at(t, u);
      const double total = std::accumulate(g.begin(), g.end(), 0.0);
      if (total == 0.0) continue;
      const auto lp = lat.at(t, u);
      for (std::size_t k = 0; k < V1; ++k) dlogits[k] = g[k] - std::exp(lp[k]) * total;
      const std::span<const double> h(cache.hidden.data() + (t * (U + 1) + u) * J, J);
      outer_accumulate(grad->joint_out, 1.0, dlogits, h);
      axpy(1.0, dlogits, grad->joint_out_bias.flat());
      std::fill(dh.begin(), dh.end(), 0.0);
      gemv_t_accumulate(model.joint_out, dlogits, dh);
      auto de = d_enc_proj.row(t);
      auto dp = d_pred_proj.row(u);
      for (std::size_t j = 0; j < J; ++j) {
        const double dz = dh[j] * (1.0 - h[j] * h[j]);
        de[j] += dz;
        dp[j] += dz;
      }
    }
  }

  Matrix d_encoded(T, model.config.encoder_dim);
  for (std::size_t t = 0; t < T; ++t) {
    outer_accumulate(grad->joint_enc, 1.0, d_enc_proj.row(t), cache.encoded.row(t));
    axpy(1.0, d_enc_proj.row(t), grad->joint_bias.flat());
    gemv_t_accumulate(model.joint_enc, d_enc_proj.row(t), d_encoded.row(t));
  }
  Matrix d_predicted(U + 1, model.config.predictor_dim);
  for (std::size_t u = 0; u <= U; ++u) {
    outer_accumulate(grad->joint_pred, 1.0, d_pred_proj.row(u), cache.predicted.row(u));
    gemv_t_accumulate(model.joint_pred, d_pred_proj.row(u), d_predicted.row(u));
  }
  nn::lstm_stack_backward(model.encoder, cache.encoder, d_encoded, grad->encoder);
  const Matrix d_inputs =
      nn::lstm_stack_backward(model.predictor, cache.predictor, d_predicted, grad->predictor);
  for (std::size_t u = 0; u <= U; ++u) {
    const auto id = static_cast<std::size_t>(u == 0 ? model.start_token() : y[u - 1]);
    axpy(1.0, d_inputs.row(u), grad->embedding.row(id));
  }
  return loss;
}

double batch_loss(const TransducerModel& model, const std::vector<const Utterance*>& batch,
                  TransducerModel* grad, std::size_t threads) {
  const std::size_t workers = resolve_threads(threads, batch.size());
  std::vector<double> losses(batch.size(), 0.0);
  if (grad == nullptr) {
    parallel_for(batch.size(), workers, [&](std::size_t, std::size_t i) {
      losses[i] = loss_and_grad(model, batch[i]->features, batch[i]->tokens, nullptr);
    });
  } else {
    std::vector<TransducerModel> partial(workers, TransducerModel::zeros_like(model));
    parallel_for(batch.size(), workers, [&](std::size_t w, std::size_t i) {
      losses[i] = loss_and_grad(model, batch[i]->features, batch[i]->tokens, &partial[w]);
    });
    *grad = std::move(partial[0]);
    for (std::size_t w = 1; w < workers; ++w) {
      accumulate_params(grad->parameters(), std::as_const(partial[w]).parameters());
    }
  }
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

double mean_loss(const TransducerModel& model, const std::vector<Utterance>& data,
                 std::size_t threads) {
  if (data.empty()) throw InputError("transducer mean_loss: empty data set");
  std::vector<const Utterance*> all;
  for (const auto& u : data) all.push_back(&u);
  return batch_loss(model, all, nullptr, threads) / static_cast<double>(data.size());
}

TrainResult train_transducer(TransducerModel& model, const std::vector<Utterance>& train,
                             const std::vector<Utterance>& dev, const TrainConfig& config) {
  if (train.empty()) throw InputError("train_transducer: empty training set");
  if (config.batch_size == 0) throw InputError("train_transducer: batch size must be positive");
  TrainResult result;
  result.initial_loss = mean_loss(model, train, config.threads);
  if (config.epochs == 0) {
    result.final_loss = result.initial_loss;
    return result;
  }

  Adam adam(config.adam, std::as_const(model).parameters());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  TransducerModel grad = TransducerModel::zeros_like(model);
  // (score, epoch, parameters) of the best checkpoints so far, best first.
  std::vector<std::pair<std::pair<double, std::size_t>, Vector>> kept;
  const std::size_t keep = std::max<std::size_t>(config.average_best, 1);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::vector<const Utterance*> batch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(&train[order[i]]);
      }
      const double loss = batch_loss(model, batch, &grad, config.threads);
      if (!std::isfinite(loss)) {
        throw NumericalError("train_transducer: non-finite loss in epoch " + std::to_string(epoch) +
                             " at batch starting " + std::to_string(start));
      }
      const double scale = 1.0 / static_cast<double>(batch.size());
      for (auto& p : grad.parameters()) {
        for (double& g : p.value->flat()) g *= scale;
      }
      adam.step(model.parameters(), std::as_const(grad).parameters());
      total += loss;
    }
    result.epoch_loss.push_back(total / static_cast<double>(train.size()));
    double score = result.epoch_loss.back();
    if (!dev.empty()) {
      result.dev_loss.push_back(mean_loss(model, dev, config.threads));
      score = result.dev_loss.back();
    }
    if (config.on_epoch) {
      config.on_epoch(epoch, result.epoch_loss.back(), dev.empty() ? score : result.dev_loss.back());
    }
    if (config.average_best > 1) {
      kept.emplace_back(std::make_pair(score, epoch), flatten(std::as_const(model).parameters()));
      std::sort(kept.begin(), kept.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (kept.size() > keep) kept.pop_back();
    }
  }

  if (config.average_best > 1) {
    Vector mean(kept.front().second.size(), 0.0);
    for (const auto& [key, flat] : kept) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += flat[i];
      result.averaged_epochs.push_back(key.second);
    }
    for (double& v : mean) v /= static_cast<double>(kept.size());
    unflatten(mean, model.parameters());
    std::sort(result.averaged_epochs.begin(), result.averaged_epochs.end());
  } else {
    result.averaged_epochs.push_back(config.epochs);
  }
  result.final_loss = mean_loss(model, train, config.threads);
  if (!std::isfinite(result.final_loss)) throw NumericalError("train_transducer: diverged");
  return result;
}

TransducerModel average_checkpoints(const std::vector<TransducerModel>& models) {
  if (models.empty()) throw InputError("average_checkpoints: no models");
  TransducerModel out = TransducerModel::zeros_like(models.front());
  const double w = 1.0 / static_cast<double>(models.size());
  for (const auto& m : models) {
    if (!same_architecture(m, models.front())) {
      throw ShapeError("average_checkpoints: architecture mismatch");
    }
    accumulate_params(out.parameters(), m.parameters(), w);
  }
  if (models.size() == 1) return models.front();
  return out;
}

Vector ilme_logprobs(const TransducerModel& model, const TokenSequence& prefix) {
  const Matrix g = predict(model, prefix);
  return ilm_distribution(model, g.row(prefix.size()));
}

double ilme_sequence_logprob(const TransducerModel& model, const TokenSequence& y) {
  const Matrix g = predict(model, y);
  double total = 0.0;
  for (std::size_t u = 0; u < y.size(); ++u) {
    total += ilm_distribution(model, g.row(u))[static_cast<std::size_t>(y[u]) - 1];
  }
  return total;
}

TokenSequence greedy_decode(const TransducerModel& model, const FeatureSequence& x) {
  const Matrix enc = encoder_projection(model, encode(model, x));
  PredictorState state = predictor_start(model);
  Vector pred = predictor_projection(model, state.output);
  TokenSequence out;
  for (std::size_t t = 0; t < enc.rows(); ++t) {
    const Vector lp = joint_logprobs(model, enc.row(t), pred);
    const auto best = static_cast<TokenId>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    if (best == 0) continue;
    out.push_back(best);
    state = predictor_advance(model, state, best);
    pred = predictor_projection(model, state.output);
  }
  return out;
}

Checkpoint to_checkpoint(const TransducerModel& model) {
  const auto& c = model.config;
  Checkpoint ckpt;
  ckpt.meta["kind"] = "transducer";
  ckpt.meta["num_tokens"] = std::to_string(c.num_tokens);
  ckpt.meta["feature_dim"] = std::to_string(c.feature_dim);
  ckpt.meta["encoder_layers"] = std::to_string(c.encoder_layers);
  ckpt.meta["encoder_dim"] = std::to_string(c.encoder_dim);
  ckpt.meta["embed_dim"] = std::to_string(c.embed_dim);
  ckpt.meta["predictor_layers"] = std::to_string(c.predictor_layers);
  ckpt.meta["predictor_dim"] = std::to_string(c.predictor_dim);
  ckpt.meta["joint_dim"] = std::to_string(c.joint_dim);
  store_params(ckpt, model.parameters());
  return ckpt;
}

TransducerModel from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta_value("kind") != "transducer") {
    throw InputError("checkpoint is not a transducer (kind=" + ckpt.meta_value("kind") + ")");
  }
  const auto get = [&](const char* key) { return std::stoul(ckpt.meta_value(key)); };
  TransducerConfig c;
  c.num_tokens = get("num_tokens");
  c.feature_dim = get("feature_dim");
  c.encoder_layers = get("encoder_layers");
  c.encoder_dim = get("encoder_dim");
  c.embed_dim = get("embed_dim");
  c.predictor_layers = get("predictor_layers");
  c.predictor_dim = get("predictor_dim");
  c.joint_dim = get("joint_dim");
  TransducerModel model = TransducerModel::create(c, 0);
  load_params(ckpt, model.parameters());
  return model;
}

void save(const TransducerModel& model, const std::filesystem::path& path) {
  write_checkpoint(path, to_checkpoint(model));
}

TransducerModel load(const std::filesystem::path& path) { return from_checkpoint(read_checkpoint(path)); }

}  // namespace lodr::transducer
