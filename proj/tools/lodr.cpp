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

// Command-line front end of the experiment pipeline.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lodr/core/error.hpp"
#include "lodr/harness/config.hpp"
#include "lodr/harness/pipeline.hpp"

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_force) {
  cmd->add_option("-c,--config", opts.config_file, "Config file (section.key = value lines)")
      ->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", opts.overrides, "Override one key, e.g. --set decode.beam=8")
      ->type_name("KEY=VALUE");
  if (with_force) cmd->add_flag("-f,--force", opts.force, "Rerun even when the stage stamp is current");
}

lodr::harness::ExperimentConfig load(const CommonOptions& opts) {
  lodr::harness::ExperimentConfig cfg;
  if (!opts.config_file.empty()) lodr::harness::load_config_file(cfg, opts.config_file);
  for (const auto& o : opts.overrides) lodr::harness::apply_override(cfg, o);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transducer LM fusion experiments on a synthetic desk task"};
  app.require_subcommand(1);
  CommonOptions opts;

  const std::vector<std::pair<lodr::harness::Stage, std::string>> stage_help{
      {lodr::harness::Stage::kGenData, "Generate source/target corpora and features"},
      {lodr::harness::Stage::kTrainRnnt, "Train the transducer on source transcripts"},
      {lodr::harness::Stage::kTrainNnlm, "Train the external LMs and the neural ILM"},
      {lodr::harness::Stage::kTrainNgram, "Train the pruned low-order ILMs"},
      {lodr::harness::Stage::kDecode, "Beam-search dev and test sets into n-best lists"},
      {lodr::harness::Stage::kAttachScores, "Attach LM scores to the n-best lists"},
      {lodr::harness::Stage::kTune, "Tune fusion weights per method on dev"},
      {lodr::harness::Stage::kRescore, "Rescore dev and test with the tuned weights"},
      {lodr::harness::Stage::kEvaluate, "Score hypotheses and ILM perplexities"},
      {lodr::harness::Stage::kReport, "Write the result tables"},
  };
  std::vector<std::pair<CLI::App*, lodr::harness::Stage>> stage_cmds;
  for (const auto& [stage, help] : stage_help) {
    auto* cmd = app.add_subcommand(lodr::harness::stage_name(stage), help);
    add_common(cmd, opts, true);
    stage_cmds.emplace_back(cmd, stage);
  }
  auto* run_cmd = app.add_subcommand("run", "Run every stage, skipping those already up to date");
  add_common(run_cmd, opts, true);
  auto* print_cmd = app.add_subcommand("print-config", "Print the effective config with documentation");
  add_common(print_cmd, opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load(opts);
    if (print_cmd->parsed()) {
      lodr::harness::print_config(std::cout, cfg);
      return 0;
    }
    lodr::harness::Pipeline pipeline(cfg, std::cerr, opts.force);
    if (run_cmd->parsed()) {
      pipeline.run_all();
      std::cout << "report: " << (pipeline.root() / "report.txt").string() << '\n';
      return 0;
    }
    for (const auto& [cmd, stage] : stage_cmds) {
      if (cmd->parsed()) pipeline.run(stage);
    }
    return 0;
  } catch (const lodr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
