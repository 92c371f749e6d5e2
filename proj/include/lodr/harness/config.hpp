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
#include <iosfwd>
#include <string>
#include <vector>

namespace lodr::harness {

struct RangeSetting {
  double lo = 0.0;
  double hi = 1.0;
};

// Every experiment setting. The text form is one "section.key = value" per
// line; '#' starts a comment. print_config writes all keys with their
// documentation and is itself a valid config file.
struct ExperimentConfig {
  // run
  std::string output_dir = "runs/desk";
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::vector<std::string> experiments{"in_domain", "cross_domain"};
  std::vector<std::string> methods{"none", "sf", "dr", "ilme", "lodr"};
  bool ablation = true;

  // data
  std::size_t vocab_size = 30;
  std::size_t train_utterances = 1000;
  std::size_t dev_utterances = 100;
  std::size_t test_utterances = 100;
  std::size_t text_sentences = 10000;
  std::size_t min_length = 3;
  std::size_t max_length = 12;
  double stop_prob = 0.15;
  std::size_t branching = 4;
  double transition_floor = 0.1;
  std::uint64_t source_seed = 11;
  std::uint64_t target_seed = 23;
  double target_shared = 0.75; // target rows = w * source row + (1 - w) * own row

  // acoustics
  std::size_t feature_dim = 16;
  std::size_t cluster_size = 3;
  double cluster_separation = 1.0;
  double cluster_spread = 0.25;
  double noise = 0.5;
  std::size_t min_duration = 1;
  std::size_t max_duration = 3;
  std::uint64_t acoustic_seed = 5;

  // rnnt
  std::size_t rnnt_encoder_layers = 2;
  std::size_t rnnt_encoder_dim = 64;
  std::size_t rnnt_embed_dim = 32;
  std::size_t rnnt_predictor_dim = 64;
  std::size_t rnnt_joint_dim = 64;
  std::size_t rnnt_epochs = 30;
  std::size_t rnnt_batch_size = 16;
  double rnnt_learning_rate = 3e-3;
  std::size_t rnnt_average_best = 10;

  // elm (one per domain text corpus)
  std::size_t elm_layers = 2;
  std::size_t elm_embed_dim = 32;
  std::size_t elm_hidden_dim = 64;
  std::size_t elm_epochs = 4;
  std::size_t elm_batch_size = 32;
  double elm_learning_rate = 3e-3;

  // dr (neural ILM on training transcripts)
  std::size_t dr_layers = 2;
  std::size_t dr_embed_dim = 32;
  std::size_t dr_hidden_dim = 64;
  std::size_t dr_epochs = 10;
  std::size_t dr_batch_size = 16;
  double dr_learning_rate = 3e-3;

  // lodr
  std::size_t lodr_order = 2;
  std::size_t lodr_prune_top_k = 100;

  // decode
  std::size_t beam = 16;

  // tune
  RangeSetting lambda0_range;
  RangeSetting lambda1_range;
  RangeSetting beta_range;
  double min_interval = 0.1;
  std::size_t max_cycles = 20;
  std::size_t max_extensions = 8;
};

// Applies "key = value" assignments from a file; unknown keys and malformed
// values throw ConfigError naming the file and line.
void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
void load_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin);

// One "key=value" override as given on the command line.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

void print_config(std::ostream& out, const ExperimentConfig& cfg);

// Value of a key in its canonical text form; throws ConfigError for unknown keys.
std::string config_value(const ExperimentConfig& cfg, const std::string& key);

// Canonical text of the listed keys, for stage fingerprints.
std::string config_fingerprint(const ExperimentConfig& cfg, const std::vector<std::string>& key_prefixes);

// Reads "fusion.<method>.<lambda0|lambda1|beta> = value" lines, such as the
// tail of a tuning report. Other keys are ignored.
struct FusionWeights {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double beta = 0.0;
};
FusionWeights read_fusion_weights(const std::filesystem::path& path, const std::string& method);

}  // namespace lodr::harness
