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

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lodr/core/error.hpp"
#include "lodr/core/vocabulary.hpp"
#include "lodr/decoder/beam_search.hpp"
#include "lodr/decoder/fusion.hpp"
#include "lodr/decoder/nbest_io.hpp"
#include "lodr/neural_lm/rnnlm.hpp"
#include "support/monotonic_oracle.hpp"

using namespace lodr;
using namespace lodr::decoder;

namespace {

transducer::TransducerModel tiny_model(std::size_t vocab, std::uint64_t seed) {
  transducer::TransducerConfig c;
  c.num_tokens = vocab;
  c.feature_dim = 2;
  c.encoder_layers = 1;
  c.encoder_dim = 3;
  c.embed_dim = 2;
  c.predictor_dim = 3;
  c.joint_dim = 4;
  auto m = transducer::TransducerModel::create(c, seed);
  // Sharper joint so the search space is not flat.
  for (double& w : m.joint_out.flat()) w *= 4.0;
  return m;
}

FeatureSequence random_features(std::size_t T, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureSequence x(T, 2);
  for (double& v : x.flat()) v = n(rng);
  return x;
}

Hypothesis hyp(TokenSequence tokens, double logp, std::map<std::string, double> scores = {}) {
  Hypothesis h;
  h.tokens = std::move(tokens);
  h.logp_rnnt = logp;
  h.cached_scores = std::move(scores);
  return h;
}

std::vector<Hypothesis> random_nbest(std::mt19937_64& rng) {
  std::normal_distribution<double> n(-10.0, 4.0);
  std::uniform_int_distribution<int> len(0, 6), tok(1, 5);
  std::vector<Hypothesis> out(1 + rng() % 12);
  for (auto& h : out) {
    h.tokens.resize(static_cast<std::size_t>(len(rng)));
    for (auto& t : h.tokens) t = tok(rng);
    h.logp_rnnt = n(rng);
    for (const char* id : {kElmScorer, kDrIlmScorer, kIlmeScorer, kLodrIlmScorer}) {
      h.cached_scores[id] = n(rng);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("single frame search matches enumeration") {
  const auto m = tiny_model(2, 1);
  std::mt19937_64 rng(1);
  const auto x = random_features(1, rng);
  const auto nbest = beam_search(m, x, 3);
  const auto oracle = lodr::testing::enumerate_monotonic(m, x);
  REQUIRE(oracle.size() == 3);
  REQUIRE(nbest.size() == 3);
  for (const auto& h : nbest) {
    REQUIRE(oracle.count(h.tokens) == 1);
    CHECK(std::abs(h.logp_rnnt - oracle.at(h.tokens)) <= 1e-12);
  }
  for (std::size_t i = 1; i < nbest.size(); ++i) CHECK(nbest[i - 1].logp_rnnt >= nbest[i].logp_rnnt);
}

TEST_CASE("beam 1 equals greedy decoding") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = tiny_model(1 + trial % 4, 100 + static_cast<std::uint64_t>(trial));
    const auto x = random_features(1 + rng() % 8, rng);
    const auto nbest = beam_search(m, x, 1);
    REQUIRE(nbest.size() == 1);
    CHECK(nbest[0].tokens == transducer::greedy_decode(m, x));
  }
}

TEST_CASE("wide beam is exact on enumerable instances") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t V = 2 + trial % 2;
    const std::size_t T = V == 2 ? 1 + rng() % 6 : 1 + rng() % 4;
    const auto m = tiny_model(V, 200 + static_cast<std::uint64_t>(trial));
    const auto x = random_features(T, rng);
    const auto oracle = lodr::testing::enumerate_monotonic(m, x);
    REQUIRE(oracle.size() <= 200);
    const auto nbest = beam_search(m, x, 200);
    CHECK(nbest.size() == oracle.size());
    auto best = oracle.begin();
    for (auto it = oracle.begin(); it != oracle.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    CHECK(nbest[0].tokens == best->first);
    for (const auto& h : nbest) CHECK(std::abs(h.logp_rnnt - oracle.at(h.tokens)) <= 1e-9);
  }
}

TEST_CASE("top score does not fall as the beam widens") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = tiny_model(3, 300 + static_cast<std::uint64_t>(trial));
    const auto x = random_features(2 + rng() % 6, rng);
    double previous = -std::numeric_limits<double>::infinity();
    for (std::size_t beam = 1; beam <= 16; beam *= 2) {
      const double top = beam_search(m, x, beam)[0].logp_rnnt;
      CHECK(top >= previous - 1e-12);
      previous = top;
    }
  }
}

TEST_CASE("beam search input validation and determinism") {
  const auto m = tiny_model(3, 5);
  std::mt19937_64 rng(5);
  const auto x = random_features(5, rng);
  CHECK_THROWS_AS(beam_search(m, x, 0), InputError);
  CHECK_THROWS_AS(beam_search(m, FeatureSequence(0, 2), 4), InputError);

  const Vocabulary vocab = Vocabulary::synthetic(3);
  std::vector<Utterance> utts{{"a", {}, x}, {"b", {}, random_features(3, rng)}};
  std::ostringstream one, two;
  write_nbest(one, decode_corpus(m, utts, 4, 1), vocab);
  write_nbest(two, decode_corpus(m, utts, 4, 2), vocab);
  CHECK(one.str() == two.str());
}

TEST_CASE("combined score arithmetic") {
  const Hypothesis h = hyp({1, 2, 3}, -10.0, {{"elm", -4.0}, {"dr_ilm", -6.0}});
  CHECK(combined_score(h, {FusionMethod::kNone, 5, 5, 5, ""}) == -10.0);
  CHECK(combined_score(h, {FusionMethod::kShallow, 0, 0.5, 1.0, ""}) == doctest::Approx(-9.0).epsilon(1e-15));
  // Bayes form: subtract the ILM, add the ELM.
  CHECK(combined_score(h, {FusionMethod::kDensityRatio, -1.0, 1.0, 0.0, ""}) ==
        doctest::Approx(-10.0 + 6.0 - 4.0).epsilon(1e-15));
  CHECK(combined_score(h, {FusionMethod::kDensityRatio, 0.0, 0.3, 0.7, ""}) ==
        combined_score(h, {FusionMethod::kShallow, 0.0, 0.3, 0.7, ""}));
  CHECK_THROWS_AS(combined_score(h, {FusionMethod::kLodr, 1, 1, 1, ""}), ContractError);
  CHECK_THROWS_AS(combined_score(hyp({}, 0.0), {FusionMethod::kShallow, 0, 1, 0, ""}), ContractError);
  FusionConfig ext{FusionMethod::kLodr, 1.0, 0.0, 0.0, "dr_ilm"};
  CHECK(combined_score(h, ext) == -16.0);
}

TEST_CASE("method names round-trip") {
  for (auto m : {FusionMethod::kNone, FusionMethod::kShallow, FusionMethod::kDensityRatio,
                 FusionMethod::kIlme, FusionMethod::kLodr}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("hat"), ConfigError);
}

TEST_CASE("rescoring") {
  SUBCASE("none keeps first-pass order") {
    std::vector<Hypothesis> nb{hyp({1}, -1.0), hyp({2}, -2.0), hyp({3, 3}, -2.5)};
    CHECK(rescore_order(nb, {}) == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("forced winner") {
    std::vector<Hypothesis> nb{hyp({1}, -1.0, {{"elm", -9.0}}), hyp({2}, -2.0, {{"elm", -1.0}})};
    const FusionConfig sf{FusionMethod::kShallow, 0.0, 1.0, 0.0, ""};
    CHECK(rescore(nb, sf)[0].tokens == TokenSequence{2});
    CHECK(best_index(nb, sf) == 1);
  }
  SUBCASE("ties prefer shorter then lexicographic") {
    std::vector<Hypothesis> nb{hyp({2, 1}, -1.0), hyp({1, 2}, -1.0), hyp({3}, -1.0)};
    CHECK(rescore_order(nb, {}) == std::vector<std::size_t>{2, 1, 0});
    CHECK(best_index(nb, {}) == 2);
  }
  SUBCASE("empty list") {
    CHECK_THROWS_AS(rescore({}, {}), InputError);
    CHECK_THROWS_AS(best_index({}, {}), InputError);
  }
  SUBCASE("constant ELM shift keeps the ranking") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> w(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
      auto nb = random_nbest(rng);
      const FusionConfig cfg{FusionMethod::kLodr, w(rng), w(rng), w(rng), ""};
      const auto before = rescore_order(nb, cfg);
      for (auto& h : nb) h.cached_scores["elm"] += 3.25;
      CHECK(rescore_order(nb, cfg) == before);
    }
  }
  SUBCASE("zero ILM weight reduces to shallow fusion") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> w(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto nb = random_nbest(rng);
      const double l1 = w(rng), beta = w(rng);
      const FusionConfig sf{FusionMethod::kShallow, 0.0, l1, beta, ""};
      for (auto m : {FusionMethod::kDensityRatio, FusionMethod::kIlme, FusionMethod::kLodr}) {
        const FusionConfig cfg{m, 0.0, l1, beta, ""};
        CHECK(rescore_order(nb, cfg) == rescore_order(nb, sf));
        for (const auto& h : nb) CHECK(std::abs(combined_score(h, cfg) - combined_score(h, sf)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("attaching LM scores") {
  std::vector<Hypothesis> nb{hyp({1, 2}, -1.0), hyp({}, -2.0), hyp({3}, -3.0)};
  SUBCASE("no scorers is a no-op") {
    const auto copy = nb;
    const auto r = attach_lm_scores(nb, {});
    CHECK(r.scored == 0);
    CHECK(nb.size() == 3);
    CHECK(nb[0].cached_scores.empty());
  }
  SUBCASE("constant scorer and idempotence") {
    attach_lm_scores(nb, {{"elm", [](const TokenSequence&) { return -2.5; }}});
    for (const auto& h : nb) CHECK(h.cached_scores.at("elm") == -2.5);
    const auto r = attach_lm_scores(nb, {{"elm", [](const TokenSequence&) { return 9.0; }}});
    CHECK(r.scored == 0);
    for (const auto& h : nb) CHECK(h.cached_scores.at("elm") == -2.5);
  }
  SUBCASE("neural LM scorer equals a direct call") {
    neural_lm::RecurrentLmConfig c;
    c.num_tokens = 3;
    c.embed_dim = 2;
    c.hidden_dim = 3;
    const auto lm = neural_lm::RecurrentLm::create(c, 1);
    attach_lm_scores(nb, {{"elm", [&](const TokenSequence& y) { return neural_lm::lm_sequence_logprob(lm, y, true); }}});
    for (const auto& h : nb) {
      CHECK(h.cached_scores.at("elm") == neural_lm::lm_sequence_logprob(lm, h.tokens, true));
    }
  }
  SUBCASE("failing scorer drops the hypothesis") {
    const auto r = attach_lm_scores(nb, {{"elm", [](const TokenSequence& y) {
                                            if (y.empty()) throw InputError("empty");
                                            return -1.0;
                                          }}});
    CHECK(nb.size() == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("rank 1") != std::string::npos);
  }
}

TEST_CASE("n-best files round-trip exactly") {
  const Vocabulary vocab = Vocabulary::synthetic(5);
  std::mt19937_64 rng(8);
  std::vector<NBestList> lists{{"utt1", random_nbest(rng)}, {"utt2", random_nbest(rng)}};
  lists[1].hypotheses[0].cached_scores.erase("dr_ilm");
  lists[0].hypotheses[0].tokens.clear();
  std::ostringstream out;
  write_nbest(out, lists, vocab);
  std::istringstream in(out.str());
  const auto back = read_nbest(in, vocab);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(back[i].hypotheses.size() == lists[i].hypotheses.size());
    for (std::size_t r = 0; r < back[i].hypotheses.size(); ++r) {
      CHECK(back[i].hypotheses[r].tokens == lists[i].hypotheses[r].tokens);
      CHECK(back[i].hypotheses[r].logp_rnnt == lists[i].hypotheses[r].logp_rnnt);
      CHECK(back[i].hypotheses[r].cached_scores == lists[i].hypotheses[r].cached_scores);
    }
  }
  std::ostringstream again;
  write_nbest(again, back, vocab);
  CHECK(again.str() == out.str());
}

TEST_CASE("malformed n-best files") {
  const Vocabulary vocab = Vocabulary::synthetic(5);
  const auto parse = [&](const std::string& text) {
    std::istringstream in(text);
    return read_nbest(in, vocab);
  };
  const std::string header = "# utt_id\trank\tlogp_rnnt\tlength\telm\ttokens\n";
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("u\t0\t-1\t0\t-1\t\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "u\t0\t-1\t1\t-1\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "u\t1\t-1\t1\t-1\tw01\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "u\t0\tx\t1\t-1\tw01\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "u\t0\t-1\t2\t-1\tw01\n"), ParseError);
  CHECK_THROWS_AS(parse(header + "u\t0\t-1\t1\t-1\tzzz\n"), ParseError);
  CHECK(parse(header + "u\t0\t-1\t1\t-\tw01\n")[0].hypotheses[0].cached_scores.empty());
}
