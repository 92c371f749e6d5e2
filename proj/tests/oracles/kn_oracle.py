# Copyright 2026 The LODR Lab Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Reference interpolated modified Kneser-Ney (test-only).

Written directly from the Chen-Goodman formulas, independent of the C++
implementation. Prints every natural-log probability and backoff so the
values can be frozen into unit tests.

Usage: python3 kn_oracle.py <corpus-name>
"""
import math
import sys
from collections import Counter, defaultdict

BOS, EOS, UNK = "<s>", "</s>", "<unk>"


def discounts(values, fallback=0.5):
    n = [sum(1 for v in values if v == j) for j in (1, 2, 3, 4)]
    if all(x > 0 for x in n):
        y = n[0] / (n[0] + 2 * n[1])
        d = [1 - 2 * y * n[1] / n[0], 2 - 3 * y * n[2] / n[1], 3 - 4 * y * n[3] / n[2]]
        if all(0 < d[k] < k + 1 for k in range(3)):
            return d, False
    return [fallback] * 3, True


def disc(d, c):
    return 0.0 if c == 0 else d[min(c, 3) - 1]


def train(corpus, vocab, order, unk=1):
    sents = [[BOS] + s.split() + [EOS] for s in corpus]
    raw = [Counter() for _ in range(order)]
    for s in sents:
        for k in range(1, order + 1):
            for i in range(len(s) - k + 1):
                raw[k - 1][tuple(s[i:i + k])] += 1
    adj = [None] * order
    adj[order - 1] = dict(raw[order - 1])
    for k in range(1, order):
        left = defaultdict(set)
        for g in raw[k]:
            left[g[1:]].add(g[0])
        a = {}
        for g, c in raw[k - 1].items():
            a[g] = c if g[0] == BOS else len(left[g])
        adj[k - 1] = a

    outcomes = list(vocab) + [EOS] + ([UNK] if unk else [])
    uni_counts = {w: adj[0].get((w,), 0) for w in outcomes}
    if unk:
        uni_counts[UNK] += unk
    d, fb = discounts([c for c in uni_counts.values() if c > 0])
    total = sum(uni_counts.values())
    gamma = sum(disc(d, c) for c in uni_counts.values()) / total
    prob = {}
    bow = {}
    for w in outcomes:
        c = uni_counts[w]
        prob[(w,)] = max(c - disc(d, c), 0) / total + gamma / len(outcomes)
    info = [("order1", d, fb)]

    def p(ctx, w):
        # backoff-resolved probability (linear domain) at the current state
        g = tuple(ctx) + (w,)
        mult = 1.0
        while g not in prob:
            mult *= bow.get(g[:-1], 1.0)
            g = g[1:]
        return mult * prob[g]

    for k in range(2, order + 1):
        grams = adj[k - 1]
        d, fb = discounts(list(grams.values()))
        info.append((f"order{k}", d, fb))
        byctx = defaultdict(dict)
        for g, c in grams.items():
            byctx[g[:-1]][g[-1]] = c
        for ctx, conts in byctx.items():
            tot = sum(conts.values())
            gam = sum(disc(d, c) for c in conts.values()) / tot
            for w, c in conts.items():
                prob[ctx + (w,)] = max(c - disc(d, c), 0) / tot + gam * p(ctx[1:], w)
            bow[ctx] = gam
    return prob, bow, info, p


CORPORA = {
    "fixture": (["a b", "a c", "b c"], ["a", "b", "c"], 2),
    "rich": (None, ["a", "b", "c", "d", "e", "f"], 2),
}


def rich_corpus():
    # Deterministic corpus with non-degenerate count-of-counts at both orders.
    return [
        "d b", "a", "d b", "d e d b", "c e", "d c a b", "c b a f",
        "a b", "d c", "b a c", "c c e c", "b b", "c b d", "b a a",
    ]


if __name__ == "__main__":
    name = sys.argv[1] if len(sys.argv) > 1 else "fixture"
    corpus, vocab, order = CORPORA[name]
    if corpus is None:
        corpus = rich_corpus()
    prob, bow, info, p = train(corpus, vocab, order)
    for tag, d, fb in info:
        print(f"# {tag} D = {d} fallback={fb}")
    for g in sorted(set(prob) | set(bow), key=lambda g: (len(g), g)):
        if g not in prob:
            print(f"{' '.join(g):12s} bow={math.log(bow[g]):.12f}")
            continue
        print(f"{' '.join(g):12s} logp={math.log(prob[g]):.12f} bow={math.log(bow[g]) if g in bow else 0.0:.12f}")
    # sentence log-probs and perplexity over the training corpus
    tot, n = 0.0, 0
    for s in corpus:
        toks = s.split()
        ctx = [BOS]
        lp = 0.0
        for w in toks + [EOS]:
            lp += math.log(p(ctx[-(order - 1):] if order > 1 else [], w))
            ctx.append(w)
        tot += lp
        n += len(toks) + 1
        print(f"sent '{s}' logp_with_eos={lp:.12f}")
    print(f"ppl={math.exp(-tot / n):.12f}")
