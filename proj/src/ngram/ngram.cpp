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

#include "lodr/ngram/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lodr/core/error.hpp"

namespace lodr::ngram {
namespace {

// ARPA convention for the never-predicted start symbol.
const double kStartLogProb = -99.0 * std::numbers::ln10;

struct Discounts {
  std::array<double, 3> d{};
  bool fallback = false;

  double operator()(std::size_t count) const {
    if (count == 0) return 0.0;
    return d[std::min<std::size_t>(count, 3) - 1];
  }
};

Discounts estimate_discounts(const std::array<std::size_t, 4>& n, double fallback) {
  Discounts out;
  if (n[0] > 0 && n[1] > 0 && n[2] > 0 && n[3] > 0) {
    const double n1 = static_cast<double>(n[0]);
    const double n2 = static_cast<double>(n[1]);
    const double n3 = static_cast<double>(n[2]);
    const double n4 = static_cast<double>(n[3]);
    const double y = n1 / (n1 + 2.0 * n2);
    out.d = {1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3};
    bool valid = true;
    for (std::size_t k = 0; k < 3; ++k) {
      valid = valid && out.d[k] > 0.0 && out.d[k] < static_cast<double>(k + 1);
    }
    if (valid) return out;
  }
  out.d = {fallback, fallback, fallback};
  out.fallback = true;
  return out;
}

template <typename Range>
std::array<std::size_t, 4> count_of_counts(const Range& counts) {
  std::array<std::size_t, 4> n{};
  for (std::size_t c : counts) {
    if (c >= 1 && c <= 4) ++n[c - 1];
  }
  return n;
}

}  // namespace

std::size_t CountTable::count(const Gram& gram) const {
  if (gram.empty() || gram.size() > order) return 0;
  const auto& m = counts[gram.size() - 1];
  auto it = m.find(gram);
  return it == m.end() ? 0 : it->second;
}

CountTable count_ngrams(const std::vector<TokenSequence>& corpus, std::size_t order,
                        const Vocabulary& vocab) {
  if (corpus.empty()) throw InputError("count_ngrams: empty corpus");
  if (order < 1) throw InputError("count_ngrams: order must be >= 1");

  CountTable table;
  table.order = order;
  table.counts.resize(order);
  Gram padded;
  for (const auto& sentence : corpus) {
    padded.clear();
    padded.push_back(vocab.start());
    for (TokenId t : sentence) {
      if (!vocab.is_regular(t) && t != vocab.unknown()) {
        throw InputError("count_ngrams: token id " + std::to_string(t) + " is not a word");
      }
      padded.push_back(t);
    }
    padded.push_back(vocab.end_of_sentence());
    for (std::size_t k = 1; k <= order; ++k) {
      for (std::size_t i = 0; i + k <= padded.size(); ++i) {
        ++table.counts[k - 1][Gram(padded.begin() + i, padded.begin() + i + k)];
      }
    }
  }

  table.continuation.resize(order > 0 ? order - 1 : 0);
  for (std::size_t k = 1; k < order; ++k) {
    auto& cont = table.continuation[k - 1];
    for (const auto& [gram, c] : table.counts[k - 1]) {
      if (gram.front() == vocab.start()) cont[gram] = c;
    }
    for (const auto& [longer, c] : table.counts[k]) {
      (void)c;
      Gram suffix(longer.begin() + 1, longer.end());
      if (suffix.front() != vocab.start()) ++cont[suffix];
    }
  }
  return table;
}

CountTable prune_top_k(const CountTable& counts, std::size_t k) {
  CountTable out = counts;
  if (counts.order == 0) return out;
  auto& top = out.counts[counts.order - 1];
  if (top.size() <= k) return out;
  std::vector<std::pair<Gram, std::size_t>> ranked(top.begin(), top.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  top.clear();
  for (std::size_t i = 0; i < k; ++i) top.insert(ranked[i]);
  return out;
}

NGramModel::NGramModel(Vocabulary vocab, std::size_t order)
    : vocab_(std::move(vocab)), order_(order), entries_(order) {}

const NGramEntry* NGramModel::find(const Gram& gram) const {
  if (gram.empty() || gram.size() > order_) return nullptr;
  const auto& m = entries_[gram.size() - 1];
  auto it = m.find(gram);
  return it == m.end() ? nullptr : &it->second;
}

std::vector<TokenId> NGramModel::outcomes() const {
  std::vector<TokenId> out;
  for (std::size_t i = 1; i <= vocab_.size(); ++i) out.push_back(static_cast<TokenId>(i));
  out.push_back(vocab_.end_of_sentence());
  if (has_unknown_) out.push_back(vocab_.unknown());
  return out;
}

TokenId NGramModel::map_token(TokenId token) const {
  if (vocab_.is_regular(token) || token == vocab_.start() || token == vocab_.end_of_sentence()) {
    if (find(Gram{token}) != nullptr) return token;
  }
  if (!has_unknown_) {
    throw InputError("n-gram score: token id " + std::to_string(token) +
                     " is not in the model and the model has no <unk>");
  }
  return vocab_.unknown();
}

double NGramModel::score(const TokenSequence& context, TokenId token) const {
  const TokenId word = map_token(token);
  const std::size_t keep = std::min(context.size(), order_ - 1);
  Gram gram;
  gram.reserve(keep + 1);
  for (std::size_t i = context.size() - keep; i < context.size(); ++i) {
    gram.push_back(map_token(context[i]));
  }
  gram.push_back(word);

  double backoff = 0.0;
  // gram = context tail + word; drop context tokens from the left until found.
  for (std::size_t start = 0; start < gram.size(); ++start) {
    Gram candidate(gram.begin() + static_cast<std::ptrdiff_t>(start), gram.end());
    if (const NGramEntry* e = find(candidate)) return backoff + e->logprob;
    Gram ctx(candidate.begin(), candidate.end() - 1);
    if (const NGramEntry* c = find(ctx)) backoff += c->backoff;
  }
  throw InputError("n-gram score: no unigram entry for token " + vocab_.name(word));
}

double NGramModel::sequence_logprob(const TokenSequence& y, bool include_eos) const {
  TokenSequence context{vocab_.start()};
  double total = 0.0;
  for (TokenId t : y) {
    total += score(context, t);
    context.push_back(t);
    if (context.size() > order_) context.erase(context.begin());
  }
  if (include_eos) total += score(context, vocab_.end_of_sentence());
  return total;
}

NGramModel train_kn(const CountTable& counts, const Vocabulary& vocab, const KnOptions& options) {
  const std::size_t order = counts.order;
  if (order < 1 || counts.counts.size() != order) throw InputError("train_kn: invalid count table");

  auto adjusted = [&](std::size_t k) -> const std::map<Gram, std::size_t>& {
    return k == order ? counts.counts[k - 1] : counts.continuation[k - 1];
  };

  NGramModel model(vocab, order);
  model.set_has_unknown(options.unk_pseudo_count > 0);
  auto& meta = model.metadata();

  // Unigrams: interpolate with the uniform distribution over the outcome set.
  const std::vector<TokenId> outcomes = model.outcomes();
  std::vector<std::size_t> unigram_counts;
  for (TokenId w : outcomes) {
    std::size_t a = 0;
    if (auto it = adjusted(1).find(Gram{w}); it != adjusted(1).end()) a = it->second;
    if (w == vocab.unknown()) a += options.unk_pseudo_count;
    unigram_counts.push_back(a);
  }
  {
    const Discounts disc =
        estimate_discounts(count_of_counts(unigram_counts), options.fallback_discount);
    meta.discounts.push_back(disc.d);
    meta.discount_fallback.push_back(disc.fallback);
    double total = 0.0, held = 0.0;
    for (std::size_t a : unigram_counts) {
      total += static_cast<double>(a);
      held += disc(a);
    }
    if (total <= 0.0) throw InputError("train_kn: no unigram mass");
    const double gamma = held / total;
    const double uniform = 1.0 / static_cast<double>(outcomes.size());
    auto& uni = model.mutable_entries(1);
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const double a = static_cast<double>(unigram_counts[i]);
      const double p = std::max(a - disc(unigram_counts[i]), 0.0) / total + gamma * uniform;
      uni[Gram{outcomes[i]}] = {std::log(p), 0.0};
    }
    uni[Gram{vocab.start()}] = {kStartLogProb, 0.0};
  }

  for (std::size_t k = 2; k <= order; ++k) {
    const auto& grams = adjusted(k);
    std::vector<std::size_t> values;
    values.reserve(grams.size());
    for (const auto& [g, a] : grams) values.push_back(a);
    const Discounts disc = estimate_discounts(count_of_counts(values), options.fallback_discount);
    meta.discounts.push_back(disc.d);
    meta.discount_fallback.push_back(disc.fallback);

    // Grams sharing a context are contiguous in map order.
    auto& level = model.mutable_entries(k);
    auto it = grams.begin();
    while (it != grams.end()) {
      const Gram context(it->first.begin(), it->first.end() - 1);
      auto end = it;
      double total = 0.0, held = 0.0;
      while (end != grams.end() && std::equal(context.begin(), context.end(), end->first.begin())) {
        total += static_cast<double>(end->second);
        held += disc(end->second);
        ++end;
      }
      const double gamma = held / total;
      const TokenSequence lower_context(context.begin() + 1, context.end());
      for (auto g = it; g != end; ++g) {
        const double lower = std::exp(model.score(lower_context, g->first.back()));
        const double p =
            std::max(static_cast<double>(g->second) - disc(g->second), 0.0) / total +
            gamma * lower;
        level[g->first] = {std::log(p), 0.0};
      }
      auto& parent = model.mutable_entries(k - 1);
      auto pit = parent.find(context);
      if (pit == parent.end()) {
        throw InputError("train_kn: context without a lower-order entry");
      }
      pit->second.backoff = std::log(gamma);
      it = end;
    }
  }
  return model;
}

double perplexity(const NGramModel& model, const std::vector<TokenSequence>& corpus) {
  if (corpus.empty()) throw InputError("perplexity: empty corpus");
  double logprob = 0.0;
  double tokens = 0.0;
  for (const auto& y : corpus) {
    logprob += model.sequence_logprob(y, true);
    tokens += static_cast<double>(y.size() + 1);
  }
  return std::exp(-logprob / tokens);
}

}  // namespace lodr::ngram
