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

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lodr/core/types.hpp"
#include "lodr/core/vocabulary.hpp"

namespace lodr::ngram {

using Gram = std::vector<TokenId>;

// Raw n-gram counts of a padded corpus (<s> w_1 .. w_U </s>).
//
// counts[k - 1] holds all k-grams. For every order below the maximum,
// continuation[k - 1] holds the Kneser-Ney adjusted counts: the number of
// distinct left extensions of the gram, or the raw count for grams that
// begin with <s>. They are computed once at counting time so that pruning the
// maximal order leaves the lower orders untouched.
struct CountTable {
  std::size_t order = 0;
  std::vector<std::map<Gram, std::size_t>> counts;
  std::vector<std::map<Gram, std::size_t>> continuation;

  std::size_t count(const Gram& gram) const;
};

CountTable count_ngrams(const std::vector<TokenSequence>& corpus, std::size_t order,
                        const Vocabulary& vocab);

// Keeps the k most frequent maximal-order grams; ties go to the
// lexicographically smaller token-id tuple.
CountTable prune_top_k(const CountTable& counts, std::size_t k);

struct KnOptions {
  // Pseudo-count given to <unk> in the unigram distribution; 0 removes <unk>
  // from the model, after which out-of-vocabulary tokens are an error.
  std::size_t unk_pseudo_count = 1;
  // Flat discount used when the count-of-counts cannot support the
  // Chen-Goodman estimates.
  double fallback_discount = 0.5;
};

struct NGramEntry {
  double logprob = 0.0;  // natural log
  double backoff = 0.0;  // natural log, 0 when the gram is never a context
};

// Backoff n-gram model. All in-memory values are natural logs.
class NGramModel {
 public:
  struct Metadata {
    // Per order: D1, D2, D3+ actually applied, and whether they come from
    // the fallback path.
    std::vector<std::array<double, 3>> discounts;
    std::vector<bool> discount_fallback;
  };

  NGramModel() = default;
  NGramModel(Vocabulary vocab, std::size_t order);

  std::size_t order() const { return order_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  bool has_unknown() const { return has_unknown_; }

  // Log-prob of `token` after `context` (only the last order - 1 context
  // tokens are used). Tokens the model has never seen map to <unk>.
  double score(const TokenSequence& context, TokenId token) const;

  // sum_u score(<s> y_<u, y_u) plus the </s> factor when include_eos.
  double sequence_logprob(const TokenSequence& y, bool include_eos) const;

  // The outcome set every conditional distribution sums to one over:
  // regular tokens, </s>, and <unk> when present.
  std::vector<TokenId> outcomes() const;

  const std::map<Gram, NGramEntry>& entries(std::size_t k) const { return entries_.at(k - 1); }
  std::map<Gram, NGramEntry>& mutable_entries(std::size_t k) { return entries_.at(k - 1); }
  const NGramEntry* find(const Gram& gram) const;

  void set_has_unknown(bool v) { has_unknown_ = v; }

  Metadata& metadata() { return meta_; }
  const Metadata& metadata() const { return meta_; }

 private:
  TokenId map_token(TokenId token) const;

  Vocabulary vocab_;
  std::size_t order_ = 0;
  bool has_unknown_ = false;
  std::vector<std::map<Gram, NGramEntry>> entries_;
  Metadata meta_;
};

// Interpolated modified Kneser-Ney.
NGramModel train_kn(const CountTable& counts, const Vocabulary& vocab,
                    const KnOptions& options = {});

// exp(-(sum of sequence_logprob with </s>) / (tokens + end markers)).
double perplexity(const NGramModel& model, const std::vector<TokenSequence>& corpus);

}  // namespace lodr::ngram
