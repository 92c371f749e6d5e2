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
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lodr/decoder/hypothesis.hpp"

namespace lodr::decoder {

enum class FusionMethod { kNone, kShallow, kDensityRatio, kIlme, kLodr };

std::string_view method_name(FusionMethod method);  // none, sf, dr, ilme, lodr
FusionMethod parse_method(std::string_view name);  // throws ConfigError

inline constexpr const char* kElmScorer = "elm";
inline constexpr const char* kDrIlmScorer = "dr_ilm";
inline constexpr const char* kIlmeScorer = "ilme_ilm";
inline constexpr const char* kLodrIlmScorer = "lodr_ilm";
inline constexpr const char* kLodrExternalIlmScorer = "lodr_ext_ilm";

bool uses_elm(FusionMethod method);
bool uses_ilm(FusionMethod method);
// Default ILM scorer id of a method; empty for none and sf.
std::string default_ilm_scorer(FusionMethod method);

struct FusionConfig {
  FusionMethod method = FusionMethod::kNone;
  double lambda0 = 0.0;  // ILM weight
  double lambda1 = 0.0;  // ELM weight
  double beta = 0.0;     // length reward
  std::string ilm_scorer;  // overrides default_ilm_scorer when non-empty

  std::string ilm_scorer_id() const;
};

// none: logp_rnnt. sf: + lambda1 elm + beta |Y|. dr, ilme, lodr additionally
// + lambda0 ilm. Zero weights drop their term. Throws ContractError when a
// required cached score is missing.
double combined_score(const Hypothesis& h, const FusionConfig& cfg);

// Indices of nbest in rescored order: stable by descending combined score,
// ties by tie_break_less. Throws InputError for an empty list.
std::vector<std::size_t> rescore_order(const std::vector<Hypothesis>& nbest,
                                       const FusionConfig& cfg);
std::size_t best_index(const std::vector<Hypothesis>& nbest, const FusionConfig& cfg);
std::vector<Hypothesis> rescore(const std::vector<Hypothesis>& nbest, const FusionConfig& cfg);

using SequenceScorer = std::function<double(const TokenSequence&)>;

struct NamedScorer {
  std::string id;
  SequenceScorer score;
};

struct AttachReport {
  std::size_t scored = 0;
  std::vector<std::string> warnings;  // one per dropped hypothesis
};

// Fills cached_scores for every scorer not yet present. A hypothesis whose
// scorer throws or returns NaN is dropped and reported.
AttachReport attach_lm_scores(std::vector<Hypothesis>& nbest, const std::vector<NamedScorer>& scorers);

}  // namespace lodr::decoder
