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
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lodr/core/types.hpp"
#include "lodr/core/vocabulary.hpp"

namespace lodr::harness {

struct LengthSpec {
  std::size_t min_length = 3;
  std::size_t max_length = 12;
  double stop_prob = 0.15;  // per-token stop chance once min_length is reached
};

// First-order Markov source over tokens 1..V. Row 0 of `transitions` is the
// sentence-initial distribution, row t the successor distribution of token t;
// column k - 1 is token k.
struct DomainSpec {
  std::size_t vocab_size = 0;
  Matrix transitions;  // (V + 1) x V
  LengthSpec lengths;

  // Throws ConfigError on bad shape, negative entries, rows not summing to
  // 1 +- 1e-9, or inconsistent lengths.
  void validate() const;
};

// Each row puts most mass on `branching` random successors (never the token
// itself) and spreads `floor` uniformly over every other non-self token.
Matrix random_transitions(std::size_t vocab_size, std::size_t branching, double floor,
                          std::uint64_t seed);

std::vector<TokenSequence> sample_sentences(const DomainSpec& spec, std::size_t count,
                                            std::mt19937_64& rng);

struct AcousticSpec {
  std::size_t feature_dim = 16;
  std::size_t cluster_size = 3;       // tokens sharing a cluster centre
  double cluster_separation = 1.0;    // scale of cluster centres
  double cluster_spread = 0.25;       // scale of token offsets within a cluster
  double noise = 0.5;                 // per-frame Gaussian noise sigma
  std::size_t min_duration = 1;       // frames per token
  std::size_t max_duration = 3;
};

// V x d token embeddings: tokens are grouped into clusters of nearby means.
Matrix token_embeddings(std::size_t vocab_size, const AcousticSpec& spec, std::uint64_t seed);

// Each token spans a uniform number of frames in [min_duration, max_duration];
// every frame is its embedding plus noise.
FeatureSequence render_features(const TokenSequence& tokens, const Matrix& embeddings,
                                const AcousticSpec& spec, std::mt19937_64& rng);

std::vector<Utterance> make_utterances(const std::vector<TokenSequence>& sentences,
                                       const std::string& id_prefix, const Matrix& embeddings,
                                       const AcousticSpec& spec, std::mt19937_64& rng);

struct DomainSizes {
  std::size_t train = 1000;
  std::size_t dev = 100;
  std::size_t test = 100;
  std::size_t text = 10000;
};

struct DomainData {
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
  std::vector<Utterance> test;
  std::vector<TokenSequence> text;
};

// Deterministic in (spec, embeddings, sizes, seed).
DomainData generate_domain(const DomainSpec& spec, const Matrix& embeddings,
                           const AcousticSpec& acoustic, const DomainSizes& sizes,
                           const std::string& name, std::uint64_t seed);

// Frequency-weighted mean total-variation distance between empirical
// successor distributions of `sentences` and the rows of `spec`.
double transition_tv_distance(const DomainSpec& spec, const std::vector<TokenSequence>& sentences);

// ----- files -----

// "id<TAB>tok tok ..." per line.
void write_transcripts(const std::filesystem::path& path, const std::vector<Utterance>& utts,
                       const Vocabulary& vocab);
std::vector<std::pair<std::string, TokenSequence>> read_transcripts(
    const std::filesystem::path& path, const Vocabulary& vocab);

// Text-only corpus in the transcript layout with generated ids.
void write_corpus(const std::filesystem::path& path, const std::vector<TokenSequence>& sentences,
                  const std::string& id_prefix, const Vocabulary& vocab);
std::vector<TokenSequence> read_corpus(const std::filesystem::path& path, const Vocabulary& vocab);

// Feature container: magic "LODRFEAT", u32 version (1), u64 utterance count,
// then per utterance u32 id length, id bytes, u64 rows, u64 cols and
// rows * cols float32 values, all little-endian.
void write_features(const std::filesystem::path& path, const std::vector<Utterance>& utts);
std::vector<std::pair<std::string, FeatureSequence>> read_features(const std::filesystem::path& path);

// Joins a transcript file and a feature file by id (same order required).
std::vector<Utterance> read_utterances(const std::filesystem::path& transcripts,
                                       const std::filesystem::path& features,
                                       const Vocabulary& vocab);
void write_utterances(const std::filesystem::path& transcripts, const std::filesystem::path& features,
                      const std::vector<Utterance>& utts, const Vocabulary& vocab);

}  // namespace lodr::harness
