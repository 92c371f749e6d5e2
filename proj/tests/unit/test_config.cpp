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
#include "lodr/harness/config.hpp"

using namespace lodr;
using namespace lodr::harness;

TEST_CASE("config text sets values and ignores comments") {
  ExperimentConfig cfg;
  load_config_text(cfg,
                   "# comment\n"
                   "run.seed = 7   # trailing\n"
                   "\n"
                   "run.methods = none, sf\n"
                   "data.stop_prob=0.25\n"
                   "tune.lambda0_range = -0.5, 0.5\n"
                   "run.ablation = false\n",
                   "inline");
  CHECK(cfg.seed == 7);
  CHECK(cfg.methods == std::vector<std::string>{"none", "sf"});
  CHECK(cfg.stop_prob == 0.25);
  CHECK(cfg.lambda0_range.lo == -0.5);
  CHECK(cfg.lambda0_range.hi == 0.5);
  CHECK_FALSE(cfg.ablation);
}

TEST_CASE("bad config lines name their origin") {
  ExperimentConfig cfg;
  const auto fails = [&](const std::string& text) {
    try {
      load_config_text(cfg, text, "cfg.txt");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(fails("run.nope = 1\n").find("cfg.txt") != std::string::npos);
  CHECK(fails("run.seed = 1\nrun.seed\n").find("line 2") != std::string::npos);
  CHECK_FALSE(fails("run.seed = -3\n").empty());
  CHECK_FALSE(fails("data.stop_prob = abc\n").empty());
  CHECK_FALSE(fails("tune.beta_range = 1, 0\n").empty());
  CHECK_FALSE(fails("run.ablation = maybe\n").empty());
  CHECK_THROWS_AS(apply_override(cfg, "decode.beam"), ConfigError);
  CHECK_THROWS_AS(config_value(cfg, "decode.width"), ConfigError);
}

TEST_CASE("overrides apply on top of defaults") {
  ExperimentConfig cfg;
  apply_override(cfg, "decode.beam=4");
  apply_override(cfg, "rnnt.learning_rate=0.01");
  CHECK(cfg.beam == 4);
  CHECK(config_value(cfg, "decode.beam") == "4");
  CHECK(cfg.rnnt_learning_rate == 0.01);
}

TEST_CASE("printed config parses back to the same values") {
  ExperimentConfig cfg;
  cfg.seed = 99;
  cfg.noise = 0.123456789;
  cfg.experiments = {"cross_domain"};
  cfg.beta_range = {-1.0, 2.5};
  std::ostringstream out;
  print_config(out, cfg);
  ExperimentConfig back;
  load_config_text(back, out.str(), "printed");
  std::ostringstream again;
  print_config(again, back);
  CHECK(out.str() == again.str());
  CHECK(back.noise == cfg.noise);
}

TEST_CASE("fingerprints follow only the selected sections") {
  ExperimentConfig a, b;
  b.beam = 3;
  CHECK(config_fingerprint(a, {"data.", "acoustic."}) == config_fingerprint(b, {"data.", "acoustic."}));
  CHECK(config_fingerprint(a, {"decode."}) != config_fingerprint(b, {"decode."}));
}

TEST_CASE("fusion weights are read back from a report") {
  const auto path = std::filesystem::temp_directory_path() / "lodr_test_weights.txt";
  {
    std::ofstream(path) << "# trace line\nfusion.lodr.lambda0 = -0.25\nfusion.lodr.lambda1 = 0.5\n"
                           "fusion.lodr.beta = 1.5\nfusion.sf.beta = 9\n";
  }
  const auto w = read_fusion_weights(path, "lodr");
  CHECK(w.lambda0 == -0.25);
  CHECK(w.lambda1 == 0.5);
  CHECK(w.beta == 1.5);
  CHECK_THROWS_AS(read_fusion_weights(path, "dr"), ConfigError);
}
