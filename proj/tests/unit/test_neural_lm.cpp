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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "lodr/core/error.hpp"
#include "lodr/neural_lm/rnnlm.hpp"
#include "lodr/numerics/grad_check.hpp"

using namespace lodr;
using namespace lodr::neural_lm;

namespace {

RecurrentLmConfig tiny(std::size_t layers = 2) {
  RecurrentLmConfig c;
  c.num_tokens = 4;
  c.embed_dim = 3;
  c.hidden_dim = 4;
  c.num_layers = layers;
  return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Two-state source over tokens {1, 2}: stays in the current state with
// probability 0.9. Sentence lengths are 3..8.
std::vector<TokenSequence> markov_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(3, 8);
  std::bernoulli_distribution stay(0.9);
  std::vector<TokenSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    TokenSequence y;
    TokenId s = 1;
    for (int k = len(rng); k > 0; --k) {
      y.push_back(s);
      if (!stay(rng)) s = 3 - s;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace

TEST_CASE("zero output projection gives uniform distributions") {
  RecurrentLm m = RecurrentLm::create(tiny(), 3);
  m.output.fill(0.0);
  for (const auto& v : lm_forward(m, {1, 4, 2})) {
    REQUIRE(v.size() == 5);
    for (double lp : v) CHECK(std::abs(lp + std::log(5.0)) <= 1e-12);
  }
  CHECK(std::abs(lm_sequence_logprob(m, {1, 4, 2}, false) + 3 * std::log(5.0)) <= 1e-12);
  CHECK(std::abs(lm_perplexity(m, {{1, 2}, {3}}) - 5.0) <= 1e-9);
}

TEST_CASE("forward is deterministic and normalized") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 11);
  const auto a = lm_forward(m, {2, 2, 3});
  const auto b = lm_forward(m, {2, 2, 3});
  CHECK(a == b);
  for (const auto& v : a) {
    double s = 0.0;
    for (double lp : v) s += std::exp(lp);
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
}

TEST_CASE("out-of-range tokens are rejected") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 1);
  CHECK_THROWS_AS(lm_forward(m, {0}), InputError);
  CHECK_THROWS_AS(lm_forward(m, {5}), InputError);
  CHECK_THROWS_AS(lm_sequence_logprob(m, {1, 6}, true), InputError);
}

TEST_CASE("single step matches hand-rolled cell") {
  const RecurrentLm m = RecurrentLm::create(tiny(1), 5);
  const std::size_t H = 4, E = 3;
  const auto x = m.embedding.row(static_cast<std::size_t>(m.start_token()));
  const auto& w = m.layers[0].weight;
  const auto& b = m.layers[0].bias;
  Vector h(H);
  for (std::size_t j = 0; j < H; ++j) {
    double pre[4];
    for (std::size_t gate = 0; gate < 4; ++gate) {
      const std::size_t r = gate * H + j;
      double s = b(r, 0);
      for (std::size_t k = 0; k < E; ++k) s += w(r, k) * x[k];
      pre[gate] = s;  // previous hidden state is zero
    }
    const double c = sigmoid(pre[0]) * std::tanh(pre[2]);
    h[j] = sigmoid(pre[3]) * std::tanh(c);
  }
  Vector logits(5);
  for (std::size_t k = 0; k < 5; ++k) {
    logits[k] = m.output_bias(k, 0);
    for (std::size_t j = 0; j < H; ++j) logits[k] += m.output(k, j) * h[j];
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l);
  const auto got = lm_forward(m, {});
  REQUIRE(got.size() == 1);
  for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(got[0][k] - (logits[k] - std::log(z))) <= 1e-12);
}

TEST_CASE("sequence logprob is the sum of per-position factors") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 9);
  const TokenSequence y{3, 1, 4, 4};
  const auto f = lm_forward(m, y);
  double sum = 0.0;
  for (std::size_t u = 0; u < y.size(); ++u) sum += f[u][static_cast<std::size_t>(y[u]) - 1];
  CHECK(std::abs(lm_sequence_logprob(m, y, false) - sum) <= 1e-12);
  CHECK(std::abs(lm_sequence_logprob(m, y, true) - (sum + f[4][m.eos_index()])) <= 1e-12);
  CHECK(lm_sequence_logprob(m, {}, false) == 0.0);
}

TEST_CASE("perplexity matches sequence logprob oracle") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 2);
  const std::vector<TokenSequence> corpus{{1, 2, 3}, {4}, {}};
  double lp = 0.0, n = 0.0;
  for (const auto& y : corpus) {
    lp += lm_sequence_logprob(m, y, true);
    n += static_cast<double>(y.size() + 1);
  }
  CHECK(std::abs(lm_perplexity(m, corpus) - std::exp(-lp / n)) <= 1e-12);
  CHECK_THROWS_AS(lm_perplexity(m, {}), InputError);
}

TEST_CASE("batch loss gradient passes finite differences") {
  const RecurrentLm base = RecurrentLm::create(tiny(), 21);
  const std::vector<TokenSequence> batch{{1, 3, 2}, {4, 4}, {}};
  const auto f = [&](std::span<const double> theta, Vector* grad) {
    RecurrentLm m = base;
    unflatten(theta, m.parameters());
    if (grad == nullptr) return lm_batch_loss(m, batch, nullptr);
    RecurrentLm g = RecurrentLm::zeros_like(m);
    const double loss = lm_batch_loss(m, batch, &g);
    *grad = flatten(std::as_const(g).parameters());
    return loss;
  };
  const Vector theta = flatten(base.parameters());
  CHECK(grad_check(f, theta) <= 1e-4);

  // Block by block: perturbing only one block at a time.
  RecurrentLm g = RecurrentLm::zeros_like(base);
  lm_batch_loss(base, batch, &g);
  const auto blocks = base.parameters();
  const auto gblocks = std::as_const(g).parameters();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    CAPTURE(blocks[b].name);
    const auto fb = [&](std::span<const double> theta_b, Vector* grad) {
      RecurrentLm m = base;
      std::copy(theta_b.begin(), theta_b.end(), m.parameters()[b].value->flat().begin());
      if (grad == nullptr) return lm_batch_loss(m, batch, nullptr);
      RecurrentLm gm = RecurrentLm::zeros_like(m);
      const double loss = lm_batch_loss(m, batch, &gm);
      const auto flat = gm.parameters()[b].value->flat();
      grad->assign(flat.begin(), flat.end());
      return loss;
    };
    const auto flat = blocks[b].value->flat();
    CHECK(grad_check(fb, Vector(flat.begin(), flat.end())) <= 1e-4);
    CHECK(gblocks[b].value->rows() == blocks[b].value->rows());
  }
}

TEST_CASE("threaded batch loss matches single thread") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 4);
  const auto batch = markov_corpus(9, 3);
  RecurrentLm g1 = RecurrentLm::zeros_like(m), g3 = RecurrentLm::zeros_like(m);
  const double l1 = lm_batch_loss(m, batch, &g1, 1);
  const double l3 = lm_batch_loss(m, batch, &g3, 3);
  CHECK(std::abs(l1 - l3) <= 1e-10);
  const Vector a = flatten(std::as_const(g1).parameters());
  const Vector b = flatten(std::as_const(g3).parameters());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("zero epochs leave the model unchanged") {
  RecurrentLm m = RecurrentLm::create(tiny(), 8);
  const Vector before = flatten(std::as_const(m).parameters());
  LmTrainConfig cfg;
  cfg.epochs = 0;
  const auto r = lm_train(m, markov_corpus(10, 1), cfg);
  CHECK(flatten(std::as_const(m).parameters()) == before);
  CHECK(r.epoch_loss.empty());
  CHECK(r.final_ppl == r.initial_ppl);
  CHECK_THROWS_AS(lm_train(m, {}, cfg), InputError);
}

TEST_CASE("training on a two-state source beats the uniform bound") {
  RecurrentLm m = RecurrentLm::create(tiny(), 1);
  LmTrainConfig cfg;
  cfg.epochs = 20;
  cfg.seed = 2;
  const auto corpus = markov_corpus(200, 7);
  const auto r = lm_train(m, corpus, cfg);
  REQUIRE(r.epoch_loss.size() == 20);
  for (double l : r.epoch_loss) CHECK(std::isfinite(l));
  CHECK(r.final_ppl < 5.0);
  CHECK(r.final_ppl <= r.initial_ppl);
  CHECK(std::abs(r.final_ppl - lm_perplexity(m, corpus)) <= 1e-12);
}

TEST_CASE("median training perplexity falls across seeds") {
  const auto corpus = markov_corpus(60, 13);
  std::vector<double> initial, final;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RecurrentLm m = RecurrentLm::create(tiny(), seed);
    LmTrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = seed;
    const auto r = lm_train(m, corpus, cfg);
    initial.push_back(r.initial_ppl);
    final.push_back(r.final_ppl);
  }
  std::sort(initial.begin(), initial.end());
  std::sort(final.begin(), final.end());
  CHECK(final[2] < initial[2]);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  const RecurrentLm m = RecurrentLm::create(tiny(), 17);
  const auto path = std::filesystem::temp_directory_path() / "lodr_test_rnnlm.ckpt";
  save(m, path);
  const RecurrentLm back = load(path);
  std::filesystem::remove(path);
  CHECK(back.config.num_layers == 2);
  CHECK(flatten(back.parameters()) == flatten(m.parameters()));
  CHECK(lm_forward(back, {1, 2}) == lm_forward(m, {1, 2}));

  Checkpoint other = to_checkpoint(m);
  other.meta["kind"] = "transducer";
  CHECK_THROWS_AS(from_checkpoint(other), InputError);
}
