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

#include "lodr/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"

namespace lodr::harness {
namespace {

struct Entry {
  std::string key;
  std::string doc;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;  // throws std::invalid_argument
};

[[noreturn]] void bad(std::string_view what) { throw std::invalid_argument(std::string(what)); }

template <typename T>
Entry unsigned_entry(std::string key, std::string doc, T ExperimentConfig::*field) {
  return {std::move(key), std::move(doc),
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); },
          [field](ExperimentConfig& c, std::string_view v) {
            const auto n = parse_int(v);
            if (!n || *n < 0) bad("expected a non-negative integer");
            c.*field = static_cast<T>(*n);
          }};
}

Entry real_entry(std::string key, std::string doc, double ExperimentConfig::*field) {
  return {std::move(key), std::move(doc),
          [field](const ExperimentConfig& c) { return format_exact(c.*field); },
          [field](ExperimentConfig& c, std::string_view v) {
            const auto d = parse_double(v);
            if (!d || !std::isfinite(*d)) bad("expected a finite number");
            c.*field = *d;
          }};
}

Entry string_entry(std::string key, std::string doc, std::string ExperimentConfig::*field) {
  return {std::move(key), std::move(doc), [field](const ExperimentConfig& c) { return c.*field; },
          [field](ExperimentConfig& c, std::string_view v) {
            if (v.empty()) bad("expected a non-empty value");
            c.*field = std::string(v);
          }};
}

Entry bool_entry(std::string key, std::string doc, bool ExperimentConfig::*field) {
  return {std::move(key), std::move(doc),
          [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field](ExperimentConfig& c, std::string_view v) {
            if (v == "true" || v == "1" || v == "yes") c.*field = true;
            else if (v == "false" || v == "0" || v == "no") c.*field = false;
            else bad("expected true or false");
          }};
}

Entry list_entry(std::string key, std::string doc, std::vector<std::string> ExperimentConfig::*field,
                 std::vector<std::string> allowed) {
  return {std::move(key), std::move(doc),
          [field](const ExperimentConfig& c) {
            std::string out;
            for (const auto& s : c.*field) out += (out.empty() ? "" : ",") + s;
            return out;
          },
          [field, allowed](ExperimentConfig& c, std::string_view v) {
            std::vector<std::string> items;
            for (auto part : split(v, ',')) {
              const std::string item(trim(part));
              if (item.empty()) continue;
              if (std::find(allowed.begin(), allowed.end(), item) == allowed.end()) {
                bad("unknown item '" + item + "'");
              }
              if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(item);
            }
            if (items.empty()) bad("expected a comma-separated list");
            c.*field = std::move(items);
          }};
}

Entry range_entry(std::string key, std::string doc, RangeSetting ExperimentConfig::*field) {
  return {std::move(key), std::move(doc),
          [field](const ExperimentConfig& c) {
            return format_exact((c.*field).lo) + "," + format_exact((c.*field).hi);
          },
          [field](ExperimentConfig& c, std::string_view v) {
            const auto parts = split(v, ',');
            if (parts.size() != 2) bad("expected 'lo,hi'");
            const auto lo = parse_double(trim(parts[0]));
            const auto hi = parse_double(trim(parts[1]));
            if (!lo || !hi || !(*lo < *hi)) bad("expected 'lo,hi' with lo < hi");
            c.*field = {*lo, *hi};
          }};
}

const std::vector<Entry>& entries() {
  using C = ExperimentConfig;
  static const std::vector<Entry> all = {
      string_entry("run.output_dir", "directory for every artifact of the run", &C::output_dir),
      unsigned_entry("run.seed", "seed for model initialisation and training order", &C::seed),
      unsigned_entry("run.threads", "worker threads for training, decoding and scoring (0 = all cores)", &C::threads),
      list_entry("run.experiments", "experiments to run: in_domain, cross_domain", &C::experiments,
                 {"in_domain", "cross_domain"}),
      list_entry("run.methods", "fusion methods reported: none, sf, dr, ilme, lodr", &C::methods,
                 {"none", "sf", "dr", "ilme", "lodr"}),
      bool_entry("run.ablation", "cross-domain LODR with a bigram from an external corpus", &C::ablation),

      unsigned_entry("data.vocab_size", "regular tokens V", &C::vocab_size),
      unsigned_entry("data.train_utterances", "source-domain training utterances", &C::train_utterances),
      unsigned_entry("data.dev_utterances", "dev utterances per domain", &C::dev_utterances),
      unsigned_entry("data.test_utterances", "test utterances per domain", &C::test_utterances),
      unsigned_entry("data.text_sentences", "text-only sentences per domain", &C::text_sentences),
      unsigned_entry("data.min_length", "minimum sentence length", &C::min_length),
      unsigned_entry("data.max_length", "maximum sentence length", &C::max_length),
      real_entry("data.stop_prob", "per-token stop probability after min_length", &C::stop_prob),
      unsigned_entry("data.branching", "likely successors per token", &C::branching),
      real_entry("data.transition_floor", "mass spread over all other successors", &C::transition_floor),
      unsigned_entry("data.source_seed", "seed of the source-domain language", &C::source_seed),
      unsigned_entry("data.target_seed", "seed of the target-domain language", &C::target_seed),
      real_entry("data.target_shared", "weight of the source transitions mixed into the target language",
                 &C::target_shared),

      unsigned_entry("acoustic.feature_dim", "feature dimension d", &C::feature_dim),
      unsigned_entry("acoustic.cluster_size", "tokens per confusable cluster", &C::cluster_size),
      real_entry("acoustic.cluster_separation", "scale of cluster centres", &C::cluster_separation),
      real_entry("acoustic.cluster_spread", "scale of token offsets inside a cluster", &C::cluster_spread),
      real_entry("acoustic.noise", "per-frame noise sigma", &C::noise),
      unsigned_entry("acoustic.min_duration", "minimum frames per token", &C::min_duration),
      unsigned_entry("acoustic.max_duration", "maximum frames per token", &C::max_duration),
      unsigned_entry("acoustic.seed", "seed of the token embeddings, shared by both domains", &C::acoustic_seed),

      unsigned_entry("rnnt.encoder_layers", "encoder LSTM layers", &C::rnnt_encoder_layers),
      unsigned_entry("rnnt.encoder_dim", "encoder LSTM width", &C::rnnt_encoder_dim),
      unsigned_entry("rnnt.embed_dim", "prediction network embedding size", &C::rnnt_embed_dim),
      unsigned_entry("rnnt.predictor_dim", "prediction network LSTM width", &C::rnnt_predictor_dim),
      unsigned_entry("rnnt.joint_dim", "joint network hidden size", &C::rnnt_joint_dim),
      unsigned_entry("rnnt.epochs", "training epochs", &C::rnnt_epochs),
      unsigned_entry("rnnt.batch_size", "utterances per update", &C::rnnt_batch_size),
      real_entry("rnnt.learning_rate", "Adam learning rate", &C::rnnt_learning_rate),
      unsigned_entry("rnnt.average_best", "checkpoints averaged, best by dev loss", &C::rnnt_average_best),

      unsigned_entry("elm.layers", "external LM LSTM layers", &C::elm_layers),
      unsigned_entry("elm.embed_dim", "external LM embedding size", &C::elm_embed_dim),
      unsigned_entry("elm.hidden_dim", "external LM LSTM width", &C::elm_hidden_dim),
      unsigned_entry("elm.epochs", "external LM epochs", &C::elm_epochs),
      unsigned_entry("elm.batch_size", "external LM sentences per update", &C::elm_batch_size),
      real_entry("elm.learning_rate", "external LM Adam learning rate", &C::elm_learning_rate),

      unsigned_entry("dr.layers", "density-ratio ILM LSTM layers", &C::dr_layers),
      unsigned_entry("dr.embed_dim", "density-ratio ILM embedding size", &C::dr_embed_dim),
      unsigned_entry("dr.hidden_dim", "density-ratio ILM LSTM width", &C::dr_hidden_dim),
      unsigned_entry("dr.epochs", "density-ratio ILM epochs", &C::dr_epochs),
      unsigned_entry("dr.batch_size", "density-ratio ILM sentences per update", &C::dr_batch_size),
      real_entry("dr.learning_rate", "density-ratio ILM Adam learning rate", &C::dr_learning_rate),

      unsigned_entry("lodr.order", "n-gram order of the low-order ILM", &C::lodr_order),
      unsigned_entry("lodr.prune_top_k", "highest-order n-grams kept (0 keeps all)", &C::lodr_prune_top_k),

      unsigned_entry("decode.beam", "beam width and n-best depth", &C::beam),

      range_entry("tune.lambda0_range", "initial search range of the ILM weight", &C::lambda0_range),
      range_entry("tune.lambda1_range", "initial search range of the ELM weight", &C::lambda1_range),
      range_entry("tune.beta_range", "initial search range of the length reward", &C::beta_range),
      real_entry("tune.min_interval", "bisection stops below this width", &C::min_interval),
      unsigned_entry("tune.max_cycles", "coordinate descent cycle cap", &C::max_cycles),
      unsigned_entry("tune.max_extensions", "range extensions per parameter and side", &C::max_extensions),
  };
  return all;
}

const Entry& find_entry(const std::string& key) {
  for (const auto& e : entries()) {
    if (e.key == key) return e;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void assign(ExperimentConfig& cfg, std::string_view key, std::string_view value, const std::string& where) {
  const std::string k(trim(key));
  const Entry* entry = nullptr;
  try {
    entry = &find_entry(k);
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  try {
    entry->set(cfg, trim(value));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + k + ": " + e.what());
  }
}

}  // namespace

void load_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + " line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    // Tuned weights live in their own files; accept them here too.
    if (key.rfind("fusion.", 0) == 0) continue;
    assign(cfg, key, body.substr(eq + 1), where);
  }
}

void load_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  load_config_text(cfg, buf.str(), path.string());
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "': expected key=value");
  assign(cfg, std::string_view(assignment).substr(0, eq), std::string_view(assignment).substr(eq + 1),
         "override '" + assignment + "'");
}

void print_config(std::ostream& out, const ExperimentConfig& cfg) {
  std::string section;
  for (const auto& e : entries()) {
    const std::string s = e.key.substr(0, e.key.find('.'));
    if (s != section) {
      if (!section.empty()) out << '\n';
      out << "# [" << s << "]\n";
      section = s;
    }
    out << "# " << e.doc << '\n' << e.key << " = " << e.get(cfg) << '\n';
  }
}

std::string config_value(const ExperimentConfig& cfg, const std::string& key) {
  return find_entry(key).get(cfg);
}

std::string config_fingerprint(const ExperimentConfig& cfg, const std::vector<std::string>& key_prefixes) {
  std::string out;
  for (const auto& e : entries()) {
    for (const auto& p : key_prefixes) {
      if (e.key.rfind(p, 0) == 0) {
        out += e.key + "=" + e.get(cfg) + "\n";
        break;
      }
    }
  }
  return out;
}

FusionWeights read_fusion_weights(const std::filesystem::path& path, const std::string& method) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read weights file " + path.string());
  FusionWeights w;
  std::string line;
  const std::string prefix = "fusion." + method + ".";
  std::size_t line_no = 0, found = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
    const auto eq = body.find('=');
    if (body.empty() || eq == std::string_view::npos) continue;
    const std::string key(trim(body.substr(0, eq)));
    if (key.rfind(prefix, 0) != 0) continue;
    const auto v = parse_double(trim(body.substr(eq + 1)));
    const std::string name = key.substr(prefix.size());
    if (!v) throw ConfigError(path.string() + " line " + std::to_string(line_no) + ": malformed number");
    if (name == "lambda0") w.lambda0 = *v;
    else if (name == "lambda1") w.lambda1 = *v;
    else if (name == "beta") w.beta = *v;
    else throw ConfigError(path.string() + " line " + std::to_string(line_no) + ": unknown key " + key);
    ++found;
  }
  if (found == 0) throw ConfigError(path.string() + ": no fusion." + method + ".* weights");
  return w;
}

}  // namespace lodr::harness
