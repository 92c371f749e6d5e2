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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lodr/harness/config.hpp"

namespace lodr::harness {

// Stages in execution order. Each stage reads the artifacts of earlier ones
// under cfg.output_dir and records a stamp (hash of its settings and inputs
// plus hashes of its outputs) so that rerunning a finished stage is a no-op.
enum class Stage {
  kGenData,
  kTrainRnnt,
  kTrainNnlm,
  kTrainNgram,
  kDecode,
  kAttachScores,
  kTune,
  kRescore,
  kEvaluate,
  kReport,
};

const std::vector<Stage>& all_stages();
std::string stage_name(Stage stage);  // gen-data, train-rnnt, ...
Stage parse_stage(const std::string& name);  // throws ConfigError

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::filesystem::path& path);

enum class StageStatus { kRan, kUpToDate };

class Pipeline {
 public:
  // Progress and timings go to `log`; artifacts never contain timings.
  Pipeline(ExperimentConfig cfg, std::ostream& log, bool force = false);

  // Throws StageError naming the stage; partial artifacts are kept.
  StageStatus run(Stage stage);
  void run_all();

  const ExperimentConfig& config() const { return cfg_; }
  const std::filesystem::path& root() const { return root_; }

  // Artifact locations.
  std::filesystem::path data_path(const std::string& name) const;
  std::filesystem::path model_path(const std::string& name) const;
  std::filesystem::path experiment_dir(const std::string& experiment) const;
  std::filesystem::path stamp_path(Stage stage) const;

 private:
  struct Plan {
    std::vector<std::string> key_prefixes;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
  };
  Plan plan(Stage stage) const;
  void execute(Stage stage);

  void gen_data();
  void train_rnnt();
  void train_nnlm();
  void train_ngram();
  void decode();
  void attach_scores();
  void tune();
  void rescore();
  void evaluate();
  void report();

  ExperimentConfig cfg_;
  std::ostream& log_;
  bool force_;
  std::filesystem::path root_;
};

}  // namespace lodr::harness
