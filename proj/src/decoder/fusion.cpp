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

#include "lodr/decoder/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lodr/core/error.hpp"

namespace lodr::decoder {
namespace {

double cached(const Hypothesis& h, const std::string& id) {
  const auto it = h.cached_scores.find(id);
  if (it == h.cached_scores.end()) {
    throw ContractError("combined_score: hypothesis has no cached score '" + id + "'");
  }
  return it->second;
}

}  // namespace

std::string_view method_name(FusionMethod method) {
  switch (method) {
    case FusionMethod::kNone: return "none";
    case FusionMethod::kShallow: return "sf";
    case FusionMethod::kDensityRatio: return "dr";
    case FusionMethod::kIlme: return "ilme";
    case FusionMethod::kLodr: return "lodr";
  }
  return "none";
}

FusionMethod parse_method(std::string_view name) {
  for (auto m : {FusionMethod::kNone, FusionMethod::kShallow, FusionMethod::kDensityRatio,
                 FusionMethod::kIlme, FusionMethod::kLodr}) {
    if (method_name(m) == name) return m;
  }
  throw ConfigError("unknown fusion method '" + std::string(name) +
                    "' (expected none, sf, dr, ilme or lodr)");
}

bool uses_elm(FusionMethod method) { return method != FusionMethod::kNone; }

bool uses_ilm(FusionMethod method) {
  return method == FusionMethod::kDensityRatio || method == FusionMethod::kIlme ||
         method == FusionMethod::kLodr;
}

std::string default_ilm_scorer(FusionMethod method) {
  switch (method) {
    case FusionMethod::kDensityRatio: return kDrIlmScorer;
    case FusionMethod::kIlme: return kIlmeScorer;
    case FusionMethod::kLodr: return kLodrIlmScorer;
    default: return "";
  }
}

std::string FusionConfig::ilm_scorer_id() const {
  return ilm_scorer.empty() ? default_ilm_scorer(method) : ilm_scorer;
}

double combined_score(const Hypothesis& h, const FusionConfig& cfg) {
  double score = h.logp_rnnt;
  if (cfg.method == FusionMethod::kNone) return score;
  if (uses_ilm(cfg.method)) {
    const double ilm = cached(h, cfg.ilm_scorer_id());
    if (cfg.lambda0 != 0.0) score += cfg.lambda0 * ilm;
  }
  const double elm = cached(h, kElmScorer);
  if (cfg.lambda1 != 0.0) score += cfg.lambda1 * elm;
  if (cfg.beta != 0.0) score += cfg.beta * static_cast<double>(h.length());
  return score;
}

std::vector<std::size_t> rescore_order(const std::vector<Hypothesis>& nbest,
                                       const FusionConfig& cfg) {
  if (nbest.empty()) throw InputError("rescore: empty n-best list");
  std::vector<double> scores(nbest.size());
  for (std::size_t i = 0; i < nbest.size(); ++i) scores[i] = combined_score(nbest[i], cfg);
  std::vector<std::size_t> order(nbest.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return tie_break_less(nbest[a].tokens, nbest[b].tokens);
  });
  return order;
}

std::size_t best_index(const std::vector<Hypothesis>& nbest, const FusionConfig& cfg) {
  if (nbest.empty()) throw InputError("rescore: empty n-best list");
  std::size_t best = 0;
  double best_score = combined_score(nbest[0], cfg);
  for (std::size_t i = 1; i < nbest.size(); ++i) {
    const double s = combined_score(nbest[i], cfg);
    if (s > best_score || (s == best_score && tie_break_less(nbest[i].tokens, nbest[best].tokens))) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

std::vector<Hypothesis> rescore(const std::vector<Hypothesis>& nbest, const FusionConfig& cfg) {
  std::vector<Hypothesis> out;
  out.reserve(nbest.size());
  for (std::size_t i : rescore_order(nbest, cfg)) out.push_back(nbest[i]);
  return out;
}

AttachReport attach_lm_scores(std::vector<Hypothesis>& nbest, const std::vector<NamedScorer>& scorers) {
  AttachReport report;
  std::vector<Hypothesis> kept;
  kept.reserve(nbest.size());
  for (std::size_t rank = 0; rank < nbest.size(); ++rank) {
    Hypothesis& h = nbest[rank];
    std::string failure;
    for (const auto& scorer : scorers) {
      if (h.cached_scores.count(scorer.id) != 0) continue;
      try {
        const double s = scorer.score(h.tokens);
        if (!std::isfinite(s)) {
          failure = scorer.id + " returned a non-finite score";
          break;
        }
        h.cached_scores.emplace(scorer.id, s);
        ++report.scored;
      } catch (const std::exception& e) {
        failure = scorer.id + " failed: " + e.what();
        break;
      }
    }
    if (failure.empty()) {
      kept.push_back(std::move(h));
    } else {
      report.warnings.push_back("dropped hypothesis rank " + std::to_string(rank) + ": " + failure);
    }
  }
  nbest = std::move(kept);
  return report;
}

}  // namespace lodr::decoder
