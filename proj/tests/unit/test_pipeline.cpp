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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lodr/core/error.hpp"
#include "lodr/harness/pipeline.hpp"

using namespace lodr;
using namespace lodr::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny(const std::string& dir) {
  ExperimentConfig cfg;
  cfg.output_dir = (fs::temp_directory_path() / dir).string();
  cfg.train_utterances = 60;
  cfg.dev_utterances = 12;
  cfg.test_utterances = 12;
  cfg.text_sentences = 200;
  cfg.rnnt_encoder_dim = cfg.rnnt_predictor_dim = cfg.rnnt_joint_dim = 16;
  cfg.rnnt_encoder_layers = 1;
  cfg.elm_hidden_dim = cfg.dr_hidden_dim = 16;
  cfg.elm_layers = cfg.dr_layers = 1;
  cfg.rnnt_epochs = 2;
  cfg.elm_epochs = cfg.dr_epochs = 1;
  cfg.beam = 3;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("stage names round trip") {
  for (Stage s : all_stages()) CHECK(parse_stage(stage_name(s)) == s);
  CHECK_THROWS_AS(parse_stage("train"), ConfigError);
}

TEST_CASE("fnv1a matches published vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("full tiny pipeline is deterministic and resumable") {
  const auto a = tiny("lodr_pipeline_a"), b = tiny("lodr_pipeline_b");
  fs::remove_all(a.output_dir);
  fs::remove_all(b.output_dir);
  std::ostringstream log;
  Pipeline pa(a, log), pb(b, log);
  pa.run_all();
  pb.run_all();
  const auto report = fs::path(a.output_dir) / "report.txt";
  REQUIRE(fs::exists(report));
  CHECK(slurp(report) == slurp(fs::path(b.output_dir) / "report.txt"));
  CHECK(slurp(fs::path(a.output_dir) / "models/rnnt.ckpt") == slurp(fs::path(b.output_dir) / "models/rnnt.ckpt"));

  for (Stage s : all_stages()) CHECK(pa.run(s) == StageStatus::kUpToDate);

  // A tampered output or a changed setting makes the stage run again.
  {
    std::ofstream(fs::path(a.output_dir) / "report.txt", std::ios::app) << "x";
  }
  CHECK(pa.run(Stage::kReport) == StageStatus::kRan);
  CHECK(slurp(report) == slurp(fs::path(b.output_dir) / "report.txt"));
  auto changed = a;
  changed.beam = 2;
  Pipeline pc(changed, log);
  CHECK(pc.run(Stage::kGenData) == StageStatus::kUpToDate);
  CHECK(pc.run(Stage::kDecode) == StageStatus::kRan);
  CHECK(pc.run(Stage::kAttachScores) == StageStatus::kRan);
}

TEST_CASE("only none gives a single-row report") {
  auto cfg = tiny("lodr_pipeline_none");
  cfg.methods = {"none"};
  cfg.experiments = {"in_domain"};
  fs::remove_all(cfg.output_dir);
  std::ostringstream log;
  Pipeline(cfg, log).run_all();
  std::ifstream in(fs::path(cfg.output_dir) / "in_domain/report.tsv");
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.rfind("none\t", 0) == 0);
  CHECK_FALSE(std::getline(in, extra));
  CHECK_FALSE(fs::exists(fs::path(cfg.output_dir) / "models/elm_source.ckpt"));
}

TEST_CASE("failures name the stage and keep earlier artifacts") {
  auto cfg = tiny("lodr_pipeline_fail");
  fs::remove_all(cfg.output_dir);
  std::ostringstream log;
  Pipeline p(cfg, log);
  p.run(Stage::kGenData);
  try {
    p.run(Stage::kDecode);
    FAIL("decode ran without a model");
  } catch (const StageError& e) {
    CHECK(e.stage() == "decode");
    CHECK(std::string(e.what()).find("rnnt.ckpt") != std::string::npos);
  }
  CHECK(fs::exists(fs::path(cfg.output_dir) / "data/source_train.txt"));
  CHECK(p.run(Stage::kGenData) == StageStatus::kUpToDate);

  auto bad = cfg;
  bad.experiments = {"elsewhere"};
  CHECK_THROWS_AS(Pipeline(bad, log), ConfigError);
  bad = cfg;
  bad.methods = {"sf", "rnnlm"};
  CHECK_THROWS_AS(Pipeline(bad, log), ConfigError);
}
