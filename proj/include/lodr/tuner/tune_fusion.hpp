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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lodr/decoder/fusion.hpp"
#include "lodr/decoder/hypothesis.hpp"
#include "lodr/tuner/search.hpp"

namespace lodr::tuner {

struct TuneOptions {
  ParameterRange lambda0{"lambda0", 0.0, 1.0, 0.1};
  ParameterRange lambda1{"lambda1", 0.0, 1.0, 0.1};
  ParameterRange beta{"beta", 0.0, 1.0, 0.1};
  // Starting weights; the method field is ignored.
  decoder::FusionConfig initial;
  std::size_t max_cycles = 20;
  std::size_t max_extensions = 8;
};

struct TuneResult {
  decoder::FusionConfig config;
  double dev_error_rate = 0.0;
  double initial_error_rate = 0.0;
  SearchTrace trace;
};

// Per-utterance edit errors of every hypothesis, so a configuration is scored
// by picking one index per utterance.
class RescoringObjective {
 public:
  // Throws InputError when an utterance lacks a reference and ContractError
  // when a hypothesis lacks a scorer the method needs.
  RescoringObjective(const std::vector<decoder::NBestList>& nbest,
                     const std::map<std::string, TokenSequence>& refs,
                     decoder::FusionMethod method, const std::string& ilm_scorer = "");

  // Corpus error rate (%) of the top rescored hypotheses.
  double operator()(const decoder::FusionConfig& cfg) const;

 private:
  const std::vector<decoder::NBestList>* nbest_;
  std::vector<std::vector<std::size_t>> errors_;
  std::vector<std::size_t> empty_errors_;
  double reference_tokens_ = 0.0;
};

// Tunes (lambda1, beta) for sf and (lambda0, lambda1, beta) for dr, ilme and
// lodr on a dev n-best set. For none the initial config is returned.
TuneResult tune_fusion(const std::vector<decoder::NBestList>& nbest,
                       const std::map<std::string, TokenSequence>& refs,
                       decoder::FusionMethod method, const TuneOptions& options);

// Trace table followed by the tuned weights as "fusion.<method>.<key> = value"
// lines that the experiment config reader accepts.
void write_tuning_report(std::ostream& out, const TuneResult& result);

}  // namespace lodr::tuner
