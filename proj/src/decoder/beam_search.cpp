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

#include "lodr/decoder/beam_search.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <string>

#include "lodr/core/error.hpp"
#include "lodr/core/parallel.hpp"
#include "lodr/numerics/logmath.hpp"

namespace lodr::decoder {
namespace {

struct PredictorCache {
  transducer::PredictorState state;
  Vector projection;
};

struct Partial {
  TokenSequence tokens;
  double score = 0.0;
  std::shared_ptr<const PredictorCache> predictor;
};

struct Candidate {
  double score = kLogZero;
  // A candidate reached by a blank keeps its parent's predictor; one reached
  // only by labels advances lazily from `parent` once it survives pruning.
  std::shared_ptr<const PredictorCache> predictor;
  std::size_t parent = 0;
  TokenId label = 0;
};

bool better(double sa, const TokenSequence& a, double sb, const TokenSequence& b) {
  if (sa != sb) return sa > sb;
  return tie_break_less(a, b);
}

std::shared_ptr<const PredictorCache> make_cache(const transducer::TransducerModel& model,
                                                 transducer::PredictorState state) {
  auto cache = std::make_shared<PredictorCache>();
  cache->projection = transducer::predictor_projection(model, state.output);
  cache->state = std::move(state);
  return cache;
}

}  // namespace

std::vector<Hypothesis> beam_search(const transducer::TransducerModel& model,
                                    const FeatureSequence& x, std::size_t beam) {
  if (beam == 0) throw InputError("beam_search: beam must be at least 1");
  const Matrix enc = transducer::encoder_projection(model, transducer::encode(model, x));
  const std::size_t V = model.config.num_tokens;

  std::vector<Partial> live(1);
  live[0].predictor = make_cache(model, transducer::predictor_start(model));

  for (std::size_t t = 0; t < enc.rows(); ++t) {
    std::map<TokenSequence, Candidate> merged;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Partial& p = live[i];
      const Vector lp = transducer::joint_logprobs(model, enc.row(t), p.predictor->projection);
      {
        Candidate& c = merged[p.tokens];
        c.score = log_add(c.score, p.score + lp[0]);
        c.predictor = p.predictor;
      }
      TokenSequence extended = p.tokens;
      extended.push_back(0);
      for (std::size_t k = 1; k <= V; ++k) {
        extended.back() = static_cast<TokenId>(k);
        auto [it, inserted] = merged.try_emplace(extended);
        Candidate& c = it->second;
        c.score = log_add(c.score, p.score + lp[k]);
        if (inserted) {
          c.parent = i;
          c.label = static_cast<TokenId>(k);
        }
      }
    }

    std::vector<std::pair<const TokenSequence*, Candidate*>> ranked;
    ranked.reserve(merged.size());
    for (auto& [tokens, cand] : merged) ranked.emplace_back(&tokens, &cand);
    const std::size_t keep = std::min(beam, ranked.size());
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
                      [](const auto& a, const auto& b) {
                        return better(a.second->score, *a.first, b.second->score, *b.first);
                      });

    std::vector<Partial> next(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& [tokens, cand] = ranked[i];
      next[i].tokens = *tokens;
      next[i].score = cand->score;
      next[i].predictor = cand->predictor
                              ? cand->predictor
                              : make_cache(model, transducer::predictor_advance(
                                                      model, live[cand->parent].predictor->state,
                                                      cand->label));
    }
    live = std::move(next);
  }

  std::vector<Hypothesis> out(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) {
    out[i].tokens = std::move(live[i].tokens);
    out[i].logp_rnnt = live[i].score;
  }
  return out;
}

std::vector<NBestList> decode_corpus(const transducer::TransducerModel& model,
                                     const std::vector<Utterance>& utterances, std::size_t beam,
                                     std::size_t threads) {
  std::vector<NBestList> out(utterances.size());
  parallel_for(utterances.size(), resolve_threads(threads, utterances.size()),
               [&](std::size_t, std::size_t i) {
                 out[i].utterance_id = utterances[i].id;
                 out[i].hypotheses = beam_search(model, utterances[i].features, beam);
               });
  return out;
}

}  // namespace lodr::decoder
