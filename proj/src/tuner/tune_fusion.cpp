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

#include "lodr/tuner/tune_fusion.hpp"

#include <ostream>

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"
#include "lodr/harness/metrics.hpp"

namespace lodr::tuner {

using decoder::FusionConfig;
using decoder::FusionMethod;

RescoringObjective::RescoringObjective(const std::vector<decoder::NBestList>& nbest,
                                       const std::map<std::string, TokenSequence>& refs,
                                       FusionMethod method, const std::string& ilm_scorer)
    : nbest_(&nbest) {
  FusionConfig probe;
  probe.method = method;
  probe.ilm_scorer = ilm_scorer;
  for (const auto& list : nbest) {
    const auto ref = refs.find(list.utterance_id);
    if (ref == refs.end()) throw InputError("no reference for utterance " + list.utterance_id);
    std::vector<std::size_t> errs;
    for (const auto& h : list.hypotheses) {
      if (decoder::uses_elm(method) && h.cached_scores.count(decoder::kElmScorer) == 0) {
        throw ContractError("utterance " + list.utterance_id + ": n-best lacks the 'elm' score column");
      }
      if (decoder::uses_ilm(method) && h.cached_scores.count(probe.ilm_scorer_id()) == 0) {
        throw ContractError("utterance " + list.utterance_id + ": n-best lacks the '" +
                            probe.ilm_scorer_id() + "' score column");
      }
      errs.push_back(harness::edit_distance(ref->second, h.tokens).errors());
    }
    errors_.push_back(std::move(errs));
    empty_errors_.push_back(ref->second.size());
    reference_tokens_ += static_cast<double>(ref->second.size());
  }
  if (refs.size() != nbest.size()) {
    throw InputError("n-best covers " + std::to_string(nbest.size()) + " utterances, references " +
                     std::to_string(refs.size()));
  }
}

double RescoringObjective::operator()(const FusionConfig& cfg) const {
  std::size_t errors = 0;
  for (std::size_t i = 0; i < nbest_->size(); ++i) {
    const auto& hyps = (*nbest_)[i].hypotheses;
    errors += hyps.empty() ? empty_errors_[i] : errors_[i][decoder::best_index(hyps, cfg)];
  }
  return reference_tokens_ == 0.0 ? 0.0 : 100.0 * static_cast<double>(errors) / reference_tokens_;
}

TuneResult tune_fusion(const std::vector<decoder::NBestList>& nbest,
                       const std::map<std::string, TokenSequence>& refs, FusionMethod method,
                       const TuneOptions& options) {
  FusionConfig base = options.initial;
  base.method = method;
  const RescoringObjective objective(nbest, refs, method, base.ilm_scorer);

  SearchSpec spec;
  spec.max_cycles = options.max_cycles;
  spec.max_extensions = options.max_extensions;
  std::vector<double FusionConfig::*> fields;
  if (decoder::uses_ilm(method)) {
    spec.parameters.push_back(options.lambda0);
    fields.push_back(&FusionConfig::lambda0);
  }
  if (decoder::uses_elm(method)) {
    spec.parameters.push_back(options.lambda1);
    spec.parameters.push_back(options.beta);
    fields.push_back(&FusionConfig::lambda1);
    fields.push_back(&FusionConfig::beta);
  }
  for (auto f : fields) spec.initial.push_back(base.*f);
  const auto to_config = [&](const std::vector<double>& point) {
    FusionConfig cfg = base;
    for (std::size_t i = 0; i < fields.size(); ++i) cfg.*fields[i] = point[i];
    return cfg;
  };
  spec.objective = [&](const std::vector<double>& point) { return objective(to_config(point)); };

  TuneResult result;
  result.trace = coordinate_descent(spec);
  result.config = to_config(result.trace.best_point);
  result.dev_error_rate = result.trace.best_value;
  result.initial_error_rate = result.trace.entries.front().value;
  return result;
}

void write_tuning_report(std::ostream& out, const TuneResult& result) {
  const auto& cfg = result.config;
  const std::string method(decoder::method_name(cfg.method));
  out << "# tuning trace for method " << method << '\n';
  out << "# eval";
  for (const auto& r : result.trace.final_ranges) out << '\t' << r.name;
  out << "\tdev_wer\taccepted\n";
  for (std::size_t i = 0; i < result.trace.entries.size(); ++i) {
    const auto& e = result.trace.entries[i];
    out << "# " << i;
    for (double v : e.point) out << '\t' << format_exact(v);
    out << '\t' << format_fixed(e.value, 4) << '\t' << (e.accepted ? "yes" : "no") << '\n';
  }
  out << "# cycles " << result.trace.cycles << (result.trace.truncated ? " (truncated)" : "")
      << ", evaluations " << result.trace.entries.size() << '\n';
  out << "# initial dev_wer " << format_fixed(result.initial_error_rate, 4) << ", tuned dev_wer "
      << format_fixed(result.dev_error_rate, 4) << '\n';
  out << "fusion." << method << ".lambda0 = " << format_exact(cfg.lambda0) << '\n';
  out << "fusion." << method << ".lambda1 = " << format_exact(cfg.lambda1) << '\n';
  out << "fusion." << method << ".beta = " << format_exact(cfg.beta) << '\n';
}

}  // namespace lodr::tuner
