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

#include "lodr/harness/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "lodr/core/error.hpp"
#include "lodr/core/parallel.hpp"
#include "lodr/core/text.hpp"
#include "lodr/decoder/beam_search.hpp"
#include "lodr/decoder/fusion.hpp"
#include "lodr/decoder/nbest_io.hpp"
#include "lodr/harness/data.hpp"
#include "lodr/harness/metrics.hpp"
#include "lodr/harness/report.hpp"
#include "lodr/neural_lm/rnnlm.hpp"
#include "lodr/ngram/arpa.hpp"
#include "lodr/ngram/ngram.hpp"
#include "lodr/transducer/transducer.hpp"
#include "lodr/tuner/tune_fusion.hpp"

namespace lodr::harness {
namespace fs = std::filesystem;
using decoder::FusionMethod;

namespace {

const std::vector<std::string> kSets{"dev", "test"};
constexpr const char* kInDomain = "in_domain";
constexpr const char* kCrossDomain = "cross_domain";
constexpr const char* kExternalLabel = "lodr_ext";

std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose) {
  const std::uint64_t h = fnv1a(purpose);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Domain whose dev/test sets an experiment evaluates on.
std::string eval_domain(const std::string& experiment) {
  return experiment == kInDomain ? "source" : "target";
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::map<std::string, TokenSequence> to_map(std::vector<std::pair<std::string, TokenSequence>> rows) {
  std::map<std::string, TokenSequence> m;
  for (auto& [id, y] : rows) {
    if (!m.emplace(id, std::move(y)).second) throw InputError("duplicate utterance id " + id);
  }
  return m;
}

void write_hypotheses(const fs::path& path, const std::vector<std::pair<std::string, TokenSequence>>& rows,
                      const Vocabulary& vocab) {
  auto out = open_out(path);
  for (const auto& [id, y] : rows) out << id << '\t' << vocab.render(y) << '\n';
  if (!out) throw InputError("error writing " + path.string());
}

// Per-token perplexity without the end marker.
double prefix_perplexity(const std::vector<TokenSequence>& corpus,
                         const std::function<double(const TokenSequence&)>& score) {
  double logp = 0.0, tokens = 0.0;
  for (const auto& y : corpus) {
    logp += score(y);
    tokens += static_cast<double>(y.size());
  }
  if (tokens == 0.0) throw InputError("perplexity: corpus has no tokens");
  return std::exp(-logp / tokens);
}

struct ResultRow {
  std::string label, set;
  EditCounts counts;
};

std::vector<ResultRow> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<ResultRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    if (f.size() < 6) throw ParseError(path.string() + ": malformed row '" + line + "'");
    ResultRow r{std::string(f[0]), std::string(f[1]), {}};
    const auto num = [&](std::string_view s) {
      const auto v = parse_int(s);
      if (!v || *v < 0) throw ParseError(path.string() + ": bad count '" + std::string(s) + "'");
      return static_cast<std::size_t>(*v);
    };
    r.counts = {num(f[2]), num(f[3]), num(f[4]), num(f[5])};
    rows.push_back(r);
  }
  return rows;
}

std::map<std::string, double> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line, '\t');
    const auto v = f.size() == 2 ? parse_double(f[1]) : std::nullopt;
    if (!v) throw ParseError(path.string() + ": malformed line '" + line + "'");
    out[std::string(f[0])] = *v;
  }
  return out;
}

std::string experiment_title(const std::string& experiment) {
  if (experiment == kInDomain) {
    return "in_domain: transducer and ELM trained on the source domain, evaluated on source dev/test";
  }
  return "cross_domain: source-trained transducer, target-domain ELM, evaluated on target dev/test";
}

}  // namespace

// ----- stage names and hashing -----

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::kGenData,     Stage::kTrainRnnt,  Stage::kTrainNnlm,
                                         Stage::kTrainNgram,  Stage::kDecode,     Stage::kAttachScores,
                                         Stage::kTune,        Stage::kRescore,    Stage::kEvaluate,
                                         Stage::kReport};
  return stages;
}

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kGenData: return "gen-data";
    case Stage::kTrainRnnt: return "train-rnnt";
    case Stage::kTrainNnlm: return "train-nnlm";
    case Stage::kTrainNgram: return "train-ngram";
    case Stage::kDecode: return "decode";
    case Stage::kAttachScores: return "attach-scores";
    case Stage::kTune: return "tune";
    case Stage::kRescore: return "rescore";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : all_stages()) {
    if (stage_name(s) == name) return s;
  }
  throw ConfigError("unknown stage '" + name + "'");
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::uint64_t hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::uint64_t h = fnv1a("");
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

// ----- pipeline -----

Pipeline::Pipeline(ExperimentConfig cfg, std::ostream& log, bool force)
    : cfg_(std::move(cfg)), log_(log), force_(force), root_(cfg_.output_dir) {
  if (cfg_.experiments.empty()) throw ConfigError("run.experiments is empty");
  for (const auto& e : cfg_.experiments) {
    if (e != kInDomain && e != kCrossDomain) throw ConfigError("unknown experiment '" + e + "'");
  }
  if (cfg_.methods.empty()) throw ConfigError("run.methods is empty");
  for (const auto& m : cfg_.methods) decoder::parse_method(m);
}

fs::path Pipeline::data_path(const std::string& name) const { return root_ / "data" / name; }
fs::path Pipeline::model_path(const std::string& name) const { return root_ / "models" / name; }
fs::path Pipeline::experiment_dir(const std::string& experiment) const { return root_ / experiment; }
fs::path Pipeline::stamp_path(Stage stage) const { return root_ / "stamps" / (stage_name(stage) + ".stamp"); }

namespace {

struct Needs {
  bool elm_source, elm_target, dr, ilme, lodr, ablation;
};

Needs needs(const ExperimentConfig& cfg) {
  const bool in = contains(cfg.experiments, kInDomain);
  const bool cross = contains(cfg.experiments, kCrossDomain);
  bool elm = false;
  for (const auto& m : cfg.methods) elm = elm || decoder::uses_elm(decoder::parse_method(m));
  const bool lodr = contains(cfg.methods, "lodr");
  return {in && elm, cross && elm, contains(cfg.methods, "dr"), contains(cfg.methods, "ilme"), lodr,
          cross && lodr && cfg.ablation};
}

// Row labels of an experiment: the methods, then the external-corpus LODR.
std::vector<std::string> row_labels(const ExperimentConfig& cfg, const std::string& experiment) {
  auto labels = cfg.methods;
  if (experiment == kCrossDomain && needs(cfg).ablation) labels.push_back(kExternalLabel);
  return labels;
}

}  // namespace

Pipeline::Plan Pipeline::plan(Stage stage) const {
  const Needs n = needs(cfg_);
  Plan p;
  const auto split_files = [&](const std::string& domain, const std::string& set) {
    return std::vector<fs::path>{data_path(domain + "_" + set + ".txt"), data_path(domain + "_" + set + ".feats")};
  };
  const auto append = [](std::vector<fs::path>& to, const std::vector<fs::path>& from) {
    to.insert(to.end(), from.begin(), from.end());
  };
  switch (stage) {
    case Stage::kGenData:
      p.key_prefixes = {"data.", "acoustic."};
      for (const auto& set : {"train", "dev", "test"}) append(p.outputs, split_files("source", set));
      for (const auto& set : kSets) append(p.outputs, split_files("target", set));
      for (const auto& f : {"source_text.txt", "target_text.txt", "external_text.txt", "summary.txt"}) {
        p.outputs.push_back(data_path(f));
      }
      break;
    case Stage::kTrainRnnt:
      p.key_prefixes = {"rnnt.", "run.seed", "run.threads"};
      append(p.inputs, split_files("source", "train"));
      append(p.inputs, split_files("source", "dev"));
      p.outputs = {model_path("rnnt.ckpt"), model_path("rnnt_train.tsv")};
      break;
    case Stage::kTrainNnlm:
      p.key_prefixes = {"elm.", "dr.", "run.seed", "run.threads", "run.experiments", "run.methods"};
      if (n.elm_source) {
        p.inputs.push_back(data_path("source_text.txt"));
        p.outputs.push_back(model_path("elm_source.ckpt"));
      }
      if (n.elm_target) {
        p.inputs.push_back(data_path("target_text.txt"));
        p.outputs.push_back(model_path("elm_target.ckpt"));
      }
      if (n.dr) {
        p.inputs.push_back(data_path("source_train.txt"));
        p.outputs.push_back(model_path("dr_ilm.ckpt"));
      }
      p.outputs.push_back(model_path("nnlm_train.tsv"));
      break;
    case Stage::kTrainNgram:
      p.key_prefixes = {"lodr.", "run.experiments", "run.methods", "run.ablation"};
      p.inputs = {data_path("source_train.txt")};
      p.outputs = {model_path("lodr_ilm.arpa")};
      if (n.ablation) {
        p.inputs.push_back(data_path("external_text.txt"));
        p.outputs.push_back(model_path("lodr_ext_ilm.arpa"));
      }
      break;
    case Stage::kDecode:
      p.key_prefixes = {"decode.", "run.experiments"};
      p.inputs.push_back(model_path("rnnt.ckpt"));
      for (const auto& e : cfg_.experiments) {
        for (const auto& set : kSets) {
          append(p.inputs, split_files(eval_domain(e), set));
          p.outputs.push_back(experiment_dir(e) / ("nbest_" + set + ".raw.tsv"));
        }
      }
      break;
    case Stage::kAttachScores:
      p.key_prefixes = {"run.experiments", "run.methods", "run.ablation"};
      p.inputs.push_back(model_path("rnnt.ckpt"));
      for (const auto& m : plan(Stage::kTrainNnlm).outputs) {
        if (m.extension() == ".ckpt") p.inputs.push_back(m);
      }
      append(p.inputs, plan(Stage::kTrainNgram).outputs);
      for (const auto& e : cfg_.experiments) {
        for (const auto& set : kSets) {
          p.inputs.push_back(experiment_dir(e) / ("nbest_" + set + ".raw.tsv"));
          p.outputs.push_back(experiment_dir(e) / ("nbest_" + set + ".tsv"));
        }
        p.outputs.push_back(experiment_dir(e) / "attach.txt");
      }
      break;
    case Stage::kTune:
      p.key_prefixes = {"tune.", "run.experiments", "run.methods"};
      for (const auto& e : cfg_.experiments) {
        p.inputs.push_back(experiment_dir(e) / "nbest_dev.tsv");
        p.inputs.push_back(data_path(eval_domain(e) + "_dev.txt"));
        for (const auto& m : cfg_.methods) p.outputs.push_back(experiment_dir(e) / ("tune_" + m + ".txt"));
      }
      break;
    case Stage::kRescore:
      p.key_prefixes = {"run.experiments", "run.methods", "run.ablation"};
      for (const auto& e : cfg_.experiments) {
        for (const auto& set : kSets) p.inputs.push_back(experiment_dir(e) / ("nbest_" + set + ".tsv"));
        for (const auto& m : cfg_.methods) p.inputs.push_back(experiment_dir(e) / ("tune_" + m + ".txt"));
        for (const auto& label : row_labels(cfg_, e)) {
          for (const auto& set : kSets) {
            p.outputs.push_back(experiment_dir(e) / ("hyp_" + label + "_" + set + ".txt"));
          }
        }
      }
      break;
    case Stage::kEvaluate:
      p.key_prefixes = {"run.experiments", "run.methods", "run.ablation"};
      p.inputs.push_back(data_path("source_train.txt"));
      p.inputs.push_back(model_path("rnnt.ckpt"));
      for (const auto& m : plan(Stage::kTrainNnlm).outputs) {
        if (m.filename() == "dr_ilm.ckpt") p.inputs.push_back(m);
      }
      append(p.inputs, plan(Stage::kTrainNgram).outputs);
      for (const auto& e : cfg_.experiments) {
        for (const auto& set : kSets) p.inputs.push_back(data_path(eval_domain(e) + "_" + set + ".txt"));
        append(p.inputs, [&] {
          std::vector<fs::path> hyps;
          for (const auto& label : row_labels(cfg_, e)) {
            for (const auto& set : kSets) hyps.push_back(experiment_dir(e) / ("hyp_" + label + "_" + set + ".txt"));
          }
          return hyps;
        }());
        p.outputs.push_back(experiment_dir(e) / "results.tsv");
      }
      p.outputs.push_back(model_path("ilm_ppl.tsv"));
      break;
    case Stage::kReport:
      p.key_prefixes = {"run.experiments", "run.methods", "run.ablation"};
      p.inputs.push_back(model_path("ilm_ppl.tsv"));
      for (const auto& e : cfg_.experiments) {
        p.inputs.push_back(experiment_dir(e) / "results.tsv");
        for (const auto& m : cfg_.methods) p.inputs.push_back(experiment_dir(e) / ("tune_" + m + ".txt"));
        p.outputs.push_back(experiment_dir(e) / "report.txt");
        p.outputs.push_back(experiment_dir(e) / "report.tsv");
        if (e == kCrossDomain && n.ablation) {
          p.outputs.push_back(experiment_dir(e) / "ablation.txt");
          p.outputs.push_back(experiment_dir(e) / "ablation.tsv");
        }
      }
      p.outputs.push_back(root_ / "report.txt");
      break;
  }
  return p;
}

StageStatus Pipeline::run(Stage stage) {
  const std::string name = stage_name(stage);
  try {
    const Plan p = plan(stage);
    std::uint64_t key = fnv1a(name + "\n" + config_fingerprint(cfg_, p.key_prefixes));
    for (const auto& in : p.inputs) {
      if (!fs::exists(in)) throw InputError("missing input " + in.string() + " (run the earlier stages first)");
      key = fnv1a(fs::relative(in, root_).generic_string() + " " + hex(hash_file(in)) + "\n", key);
    }
    const fs::path stamp = stamp_path(stage);
    if (!force_ && fs::exists(stamp)) {
      std::ifstream in(stamp);
      std::string line;
      bool fresh = std::getline(in, line) && line == "key " + hex(key);
      std::size_t seen = 0;
      while (fresh && std::getline(in, line)) {
        const auto f = split_whitespace(line);
        if (f.size() != 3 || f[0] != "output") {
          fresh = false;
          break;
        }
        const fs::path out = root_ / f[1];
        fresh = fs::exists(out) && hex(hash_file(out)) == f[2];
        ++seen;
      }
      if (fresh && seen == p.outputs.size()) {
        log_ << name << ": up to date\n";
        return StageStatus::kUpToDate;
      }
    }
    log_ << name << ": running\n" << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    fs::remove(stamp);
    execute(stage);
    std::ostringstream s;
    s << "key " << hex(key) << '\n';
    for (const auto& out : p.outputs) {
      if (!fs::exists(out)) throw ContractError("stage did not produce " + out.string());
      s << "output " << fs::relative(out, root_).generic_string() << ' ' << hex(hash_file(out)) << '\n';
    }
    open_out(stamp) << s.str();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log_ << name << ": done in " << format_fixed(secs, 1) << " s\n" << std::flush;
    return StageStatus::kRan;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void Pipeline::run_all() {
  for (Stage s : all_stages()) run(s);
}

void Pipeline::execute(Stage stage) {
  fs::create_directories(root_ / "data");
  fs::create_directories(root_ / "models");
  for (const auto& e : cfg_.experiments) fs::create_directories(experiment_dir(e));
  switch (stage) {
    case Stage::kGenData: return gen_data();
    case Stage::kTrainRnnt: return train_rnnt();
    case Stage::kTrainNnlm: return train_nnlm();
    case Stage::kTrainNgram: return train_ngram();
    case Stage::kDecode: return decode();
    case Stage::kAttachScores: return attach_scores();
    case Stage::kTune: return tune();
    case Stage::kRescore: return rescore();
    case Stage::kEvaluate: return evaluate();
    case Stage::kReport: return report();
  }
}

// ----- stages -----

void Pipeline::gen_data() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  const LengthSpec lengths{cfg_.min_length, cfg_.max_length, cfg_.stop_prob};
  const auto domain = [&](std::uint64_t seed) {
    DomainSpec d;
    d.vocab_size = cfg_.vocab_size;
    d.transitions = random_transitions(cfg_.vocab_size, cfg_.branching, cfg_.transition_floor, seed);
    d.lengths = lengths;
    return d;
  };
  if (!(cfg_.target_shared >= 0.0 && cfg_.target_shared <= 1.0)) {
    throw ConfigError("data.target_shared must be in [0, 1]");
  }
  const DomainSpec source = domain(cfg_.source_seed);
  DomainSpec target = domain(cfg_.target_seed);
  // The target language keeps part of the source statistics.
  for (std::size_t i = 0; i < target.transitions.size(); ++i) {
    target.transitions.data()[i] = cfg_.target_shared * source.transitions.data()[i] +
                                   (1.0 - cfg_.target_shared) * target.transitions.data()[i];
  }
  AcousticSpec ac;
  ac.feature_dim = cfg_.feature_dim;
  ac.cluster_size = cfg_.cluster_size;
  ac.cluster_separation = cfg_.cluster_separation;
  ac.cluster_spread = cfg_.cluster_spread;
  ac.noise = cfg_.noise;
  ac.min_duration = cfg_.min_duration;
  ac.max_duration = cfg_.max_duration;
  // Both domains share acoustics; only the token statistics differ.
  const Matrix emb = token_embeddings(cfg_.vocab_size, ac, cfg_.acoustic_seed);

  const DomainSizes src_sizes{cfg_.train_utterances, cfg_.dev_utterances, cfg_.test_utterances,
                              cfg_.text_sentences};
  const DomainSizes tgt_sizes{0, cfg_.dev_utterances, cfg_.test_utterances, cfg_.text_sentences};
  const auto src = generate_domain(source, emb, ac, src_sizes, "src",
                                   derive_seed(cfg_.source_seed, "source-sample"));
  const auto tgt = generate_domain(target, emb, ac, tgt_sizes, "tgt",
                                   derive_seed(cfg_.target_seed, "target-sample"));

  write_utterances(data_path("source_train.txt"), data_path("source_train.feats"), src.train, vocab);
  write_utterances(data_path("source_dev.txt"), data_path("source_dev.feats"), src.dev, vocab);
  write_utterances(data_path("source_test.txt"), data_path("source_test.feats"), src.test, vocab);
  write_utterances(data_path("target_dev.txt"), data_path("target_dev.feats"), tgt.dev, vocab);
  write_utterances(data_path("target_test.txt"), data_path("target_test.feats"), tgt.test, vocab);
  write_corpus(data_path("source_text.txt"), src.text, "srctext", vocab);
  write_corpus(data_path("target_text.txt"), tgt.text, "tgttext", vocab);

  // External corpus for the low-order ILM: a random subset of the source
  // text with as many sentences as there are training transcripts.
  std::vector<std::size_t> idx(src.text.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(derive_seed(cfg_.source_seed, "external-corpus"));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(idx.size(), src.train.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<TokenSequence> external;
  for (std::size_t i : idx) external.push_back(src.text[i]);
  write_corpus(data_path("external_text.txt"), external, "exttext", vocab);

  const auto mean_length = [](const std::vector<Utterance>& u, bool frames) {
    double s = 0.0;
    for (const auto& x : u) s += static_cast<double>(frames ? x.features.rows() : x.tokens.size());
    return u.empty() ? 0.0 : s / static_cast<double>(u.size());
  };
  auto out = open_out(data_path("summary.txt"));
  out << "source_train_utterances\t" << src.train.size() << '\n'
      << "source_train_mean_tokens\t" << format_fixed(mean_length(src.train, false), 3) << '\n'
      << "source_train_mean_frames\t" << format_fixed(mean_length(src.train, true), 3) << '\n'
      << "source_text_tv_to_source\t" << format_fixed(transition_tv_distance(source, src.text), 6) << '\n'
      << "target_text_tv_to_target\t" << format_fixed(transition_tv_distance(target, tgt.text), 6) << '\n'
      << "source_text_tv_to_target\t" << format_fixed(transition_tv_distance(target, src.text), 6) << '\n'
      << "external_sentences\t" << external.size() << '\n';
}

void Pipeline::train_rnnt() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  const auto train = read_utterances(data_path("source_train.txt"), data_path("source_train.feats"), vocab);
  const auto dev = read_utterances(data_path("source_dev.txt"), data_path("source_dev.feats"), vocab);
  transducer::TransducerConfig mc;
  mc.num_tokens = cfg_.vocab_size;
  mc.feature_dim = cfg_.feature_dim;
  mc.encoder_layers = cfg_.rnnt_encoder_layers;
  mc.encoder_dim = cfg_.rnnt_encoder_dim;
  mc.embed_dim = cfg_.rnnt_embed_dim;
  mc.predictor_dim = cfg_.rnnt_predictor_dim;
  mc.joint_dim = cfg_.rnnt_joint_dim;
  auto model = transducer::TransducerModel::create(mc, derive_seed(cfg_.seed, "rnnt-init"));
  transducer::TrainConfig tc;
  tc.epochs = cfg_.rnnt_epochs;
  tc.batch_size = cfg_.rnnt_batch_size;
  tc.adam.learning_rate = cfg_.rnnt_learning_rate;
  tc.seed = derive_seed(cfg_.seed, "rnnt-train");
  tc.threads = cfg_.threads;
  tc.average_best = cfg_.rnnt_average_best;
  tc.on_epoch = [&](std::size_t e, double tr, double dv) {
    log_ << "  rnnt epoch " << e << " train " << format_fixed(tr, 4) << " dev " << format_fixed(dv, 4) << '\n'
         << std::flush;
  };
  const auto result = transducer::train_transducer(model, train, dev, tc);
  transducer::save(model, model_path("rnnt.ckpt"));
  auto out = open_out(model_path("rnnt_train.tsv"));
  out << "# epoch\ttrain_loss\tdev_loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    out << e + 1 << '\t' << format_exact(result.epoch_loss[e]) << '\t'
        << (e < result.dev_loss.size() ? format_exact(result.dev_loss[e]) : "-") << '\n';
  }
  out << "# averaged epochs:";
  for (std::size_t e : result.averaged_epochs) out << ' ' << e;
  out << "\n# final_loss\t" << format_exact(result.final_loss) << '\n';
}

void Pipeline::train_nnlm() {
  const Needs n = needs(cfg_);
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  auto log = open_out(model_path("nnlm_train.tsv"));
  log << "# model\tinitial_ppl\tfinal_ppl\tepoch_losses\n";
  const auto train = [&](const std::string& name, const std::vector<TokenSequence>& corpus, std::size_t layers,
                         std::size_t embed, std::size_t hidden, std::size_t epochs, std::size_t batch, double lr) {
    neural_lm::RecurrentLmConfig mc{cfg_.vocab_size, embed, hidden, layers};
    auto model = neural_lm::RecurrentLm::create(mc, derive_seed(cfg_.seed, name + "-init"));
    neural_lm::LmTrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch;
    tc.adam.learning_rate = lr;
    tc.seed = derive_seed(cfg_.seed, name + "-train");
    tc.threads = cfg_.threads;
    tc.on_epoch = [&](std::size_t e, double loss) {
      log_ << "  " << name << " epoch " << e << " loss " << format_fixed(loss, 4) << '\n' << std::flush;
    };
    const auto r = neural_lm::lm_train(model, corpus, tc);
    neural_lm::save(model, model_path(name + ".ckpt"));
    log << name << '\t' << format_exact(r.initial_ppl) << '\t' << format_exact(r.final_ppl) << '\t';
    for (std::size_t e = 0; e < r.epoch_loss.size(); ++e) log << (e ? "," : "") << format_exact(r.epoch_loss[e]);
    log << '\n';
  };
  if (n.elm_source) {
    train("elm_source", read_corpus(data_path("source_text.txt"), vocab), cfg_.elm_layers, cfg_.elm_embed_dim,
          cfg_.elm_hidden_dim, cfg_.elm_epochs, cfg_.elm_batch_size, cfg_.elm_learning_rate);
  }
  if (n.elm_target) {
    train("elm_target", read_corpus(data_path("target_text.txt"), vocab), cfg_.elm_layers, cfg_.elm_embed_dim,
          cfg_.elm_hidden_dim, cfg_.elm_epochs, cfg_.elm_batch_size, cfg_.elm_learning_rate);
  }
  if (n.dr) {
    train("dr_ilm", read_corpus(data_path("source_train.txt"), vocab), cfg_.dr_layers, cfg_.dr_embed_dim,
          cfg_.dr_hidden_dim, cfg_.dr_epochs, cfg_.dr_batch_size, cfg_.dr_learning_rate);
  }
}

void Pipeline::train_ngram() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  const auto build = [&](const fs::path& corpus, const std::string& name) {
    const auto counts = ngram::count_ngrams(read_corpus(corpus, vocab), cfg_.lodr_order, vocab);
    const auto model = ngram::train_kn(ngram::prune_top_k(counts, cfg_.lodr_prune_top_k), vocab);
    ngram::write_arpa(model_path(name + ".arpa"), model);
  };
  fs::create_directories(model_path(""));
  build(data_path("source_train.txt"), "lodr_ilm");
  if (needs(cfg_).ablation) build(data_path("external_text.txt"), "lodr_ext_ilm");
}

void Pipeline::decode() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  const auto model = transducer::load(model_path("rnnt.ckpt"));
  for (const auto& e : cfg_.experiments) {
    for (const auto& set : kSets) {
      const std::string base = eval_domain(e) + "_" + set;
      const auto utts = read_utterances(data_path(base + ".txt"), data_path(base + ".feats"), vocab);
      const auto lists = decoder::decode_corpus(model, utts, cfg_.beam, cfg_.threads);
      fs::create_directories(experiment_dir(e));
      decoder::write_nbest(experiment_dir(e) / ("nbest_" + set + ".raw.tsv"), lists, vocab);
    }
  }
}

void Pipeline::attach_scores() {
  const Needs n = needs(cfg_);
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  const auto rnnt = transducer::load(model_path("rnnt.ckpt"));
  std::map<std::string, neural_lm::RecurrentLm> nnlms;
  for (const char* name : {"elm_source", "elm_target", "dr_ilm"}) {
    if (fs::exists(model_path(std::string(name) + ".ckpt")) &&
        (std::string(name) != "dr_ilm" || n.dr) &&
        (std::string(name) != "elm_source" || n.elm_source) &&
        (std::string(name) != "elm_target" || n.elm_target)) {
      nnlms.emplace(name, neural_lm::load(model_path(std::string(name) + ".ckpt")));
    }
  }
  const auto lodr = ngram::read_arpa(model_path("lodr_ilm.arpa"), vocab);
  std::optional<ngram::NGramModel> lodr_ext;
  if (n.ablation) lodr_ext = ngram::read_arpa(model_path("lodr_ext_ilm.arpa"), vocab);

  for (const auto& e : cfg_.experiments) {
    std::vector<decoder::NamedScorer> scorers;
    const std::string elm = e == kInDomain ? "elm_source" : "elm_target";
    if (nnlms.count(elm)) {
      const auto* m = &nnlms.at(elm);
      scorers.push_back({decoder::kElmScorer, [m](const TokenSequence& y) {
                           return neural_lm::lm_sequence_logprob(*m, y, true);
                         }});
    }
    if (n.dr) {
      const auto* m = &nnlms.at("dr_ilm");
      scorers.push_back({decoder::kDrIlmScorer, [m](const TokenSequence& y) {
                           return neural_lm::lm_sequence_logprob(*m, y, true);
                         }});
    }
    if (n.ilme) {
      scorers.push_back({decoder::kIlmeScorer, [&rnnt](const TokenSequence& y) {
                           return transducer::ilme_sequence_logprob(rnnt, y);
                         }});
    }
    if (n.lodr) {
      scorers.push_back({decoder::kLodrIlmScorer, [&lodr](const TokenSequence& y) {
                           return lodr.sequence_logprob(y, true);
                         }});
    }
    if (e == kCrossDomain && lodr_ext) {
      const auto* m = &*lodr_ext;
      scorers.push_back({decoder::kLodrExternalIlmScorer, [m](const TokenSequence& y) {
                           return m->sequence_logprob(y, true);
                         }});
    }

    auto report = open_out(experiment_dir(e) / "attach.txt");
    std::set<TokenSequence> prefixes;
    for (const auto& set : kSets) {
      auto lists = decoder::read_nbest(experiment_dir(e) / ("nbest_" + set + ".raw.tsv"), vocab);
      std::vector<decoder::AttachReport> reports(lists.size());
      parallel_for(lists.size(), cfg_.threads, [&](std::size_t, std::size_t i) {
        reports[i] = decoder::attach_lm_scores(lists[i].hypotheses, scorers);
      });
      std::size_t scored = 0, dropped = 0;
      for (std::size_t i = 0; i < lists.size(); ++i) {
        scored += reports[i].scored;
        dropped += reports[i].warnings.size();
        for (const auto& w : reports[i].warnings) report << "# " << set << ' ' << lists[i].utterance_id << ": " << w << '\n';
        for (const auto& h : lists[i].hypotheses) {
          for (std::size_t u = 0; u <= h.tokens.size(); ++u) {
            prefixes.emplace(h.tokens.begin(), h.tokens.begin() + static_cast<std::ptrdiff_t>(u));
          }
        }
      }
      decoder::write_nbest(experiment_dir(e) / ("nbest_" + set + ".tsv"), lists, vocab);
      report << set << "_hypotheses_scored\t" << scored << '\n' << set << "_hypotheses_dropped\t" << dropped << '\n';
    }
    if (n.ilme) {
      // Every ILME distribution met while scoring must be normalized.
      double worst = 0.0;
      for (const auto& prefix : prefixes) {
        const Vector lp = transducer::ilme_logprobs(rnnt, prefix);
        double mass = 0.0;
        for (double v : lp) mass += std::exp(v);
        worst = std::max(worst, std::abs(mass - 1.0));
      }
      report << "ilme_prefixes_checked\t" << prefixes.size() << '\n'
             << "ilme_max_normalization_error\t" << format_exact(worst) << '\n';
      if (!(worst <= 1e-9)) {
        throw NumericalError("ILME distribution off by " + format_exact(worst) + " from unit mass");
      }
    }
  }
}

void Pipeline::tune() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  tuner::TuneOptions base;
  const auto range = [&](const std::string& name, const RangeSetting& r) {
    return tuner::ParameterRange{name, r.lo, r.hi, cfg_.min_interval};
  };
  base.lambda0 = range("lambda0", cfg_.lambda0_range);
  base.lambda1 = range("lambda1", cfg_.lambda1_range);
  base.beta = range("beta", cfg_.beta_range);
  base.max_cycles = cfg_.max_cycles;
  base.max_extensions = cfg_.max_extensions;

  for (const auto& e : cfg_.experiments) {
    const auto nbest = decoder::read_nbest(experiment_dir(e) / "nbest_dev.tsv", vocab);
    const auto refs = to_map(read_transcripts(data_path(eval_domain(e) + "_dev.txt"), vocab));
    // Shallow fusion first: the ILM methods start from its optimum with
    // lambda0 = 0, so they can only match or improve on it.
    std::vector<std::string> order = cfg_.methods;
    std::stable_partition(order.begin(), order.end(), [](const std::string& m) { return m == "sf"; });
    std::optional<decoder::FusionConfig> sf_optimum;
    for (const auto& name : order) {
      const FusionMethod method = decoder::parse_method(name);
      tuner::TuneOptions opts = base;
      if (decoder::uses_ilm(method) && sf_optimum) {
        opts.initial = *sf_optimum;
        opts.initial.lambda0 = 0.0;
      }
      const auto result = tuner::tune_fusion(nbest, refs, method, opts);
      if (method == FusionMethod::kShallow) sf_optimum = result.config;
      log_ << "  " << e << ' ' << name << ": dev " << format_fixed(result.initial_error_rate, 2) << " -> "
           << format_fixed(result.dev_error_rate, 2) << " after " << result.trace.entries.size()
           << " evaluations\n" << std::flush;
      auto out = open_out(experiment_dir(e) / ("tune_" + name + ".txt"));
      tuner::write_tuning_report(out, result);
    }
  }
}

void Pipeline::rescore() {
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  for (const auto& e : cfg_.experiments) {
    for (const auto& set : kSets) {
      const auto lists = decoder::read_nbest(experiment_dir(e) / ("nbest_" + set + ".tsv"), vocab);
      for (const auto& label : row_labels(cfg_, e)) {
        // The external-corpus row reuses LODR's weights with the other ILM.
        const bool external = label == kExternalLabel;
        const std::string method_name = external ? "lodr" : label;
        decoder::FusionConfig fc;
        fc.method = decoder::parse_method(method_name);
        const auto w = read_fusion_weights(experiment_dir(e) / ("tune_" + method_name + ".txt"), method_name);
        fc.lambda0 = w.lambda0;
        fc.lambda1 = w.lambda1;
        fc.beta = w.beta;
        if (external) fc.ilm_scorer = decoder::kLodrExternalIlmScorer;
        std::vector<std::pair<std::string, TokenSequence>> hyps;
        for (const auto& l : lists) {
          hyps.emplace_back(l.utterance_id, l.hypotheses.empty()
                                                ? TokenSequence{}
                                                : l.hypotheses[decoder::best_index(l.hypotheses, fc)].tokens);
        }
        write_hypotheses(experiment_dir(e) / ("hyp_" + label + "_" + set + ".txt"), hyps, vocab);
      }
    }
  }
}

void Pipeline::evaluate() {
  const Needs n = needs(cfg_);
  const auto vocab = Vocabulary::synthetic(cfg_.vocab_size);
  for (const auto& e : cfg_.experiments) {
    auto out = open_out(experiment_dir(e) / "results.tsv");
    out << "# label\tset\tsubstitutions\tdeletions\tinsertions\treference_tokens\terror_rate\n";
    for (const auto& set : kSets) {
      const auto refs = to_map(read_transcripts(data_path(eval_domain(e) + "_" + set + ".txt"), vocab));
      for (const auto& label : row_labels(cfg_, e)) {
        const auto hyps = to_map(read_transcripts(experiment_dir(e) / ("hyp_" + label + "_" + set + ".txt"), vocab));
        const EditCounts c = corpus_errors(refs, hyps);
        out << label << '\t' << set << '\t' << c.substitutions << '\t' << c.deletions << '\t' << c.insertions
            << '\t' << c.reference_length << '\t' << format_fixed(error_rate(c), 4) << '\n';
      }
    }
  }

  // Perplexity of every ILM on the training transcripts, end marker excluded.
  const auto transcripts = read_corpus(data_path("source_train.txt"), vocab);
  auto out = open_out(model_path("ilm_ppl.tsv"));
  out << "# ilm\tperplexity\n";
  if (n.dr) {
    const auto m = neural_lm::load(model_path("dr_ilm.ckpt"));
    out << "dr\t" << format_exact(prefix_perplexity(transcripts, [&](const TokenSequence& y) {
      return neural_lm::lm_sequence_logprob(m, y, false);
    })) << '\n';
  }
  if (n.ilme) {
    const auto m = transducer::load(model_path("rnnt.ckpt"));
    out << "ilme\t" << format_exact(prefix_perplexity(transcripts, [&](const TokenSequence& y) {
      return transducer::ilme_sequence_logprob(m, y);
    })) << '\n';
  }
  const auto ngram_ppl = [&](const std::string& label, const std::string& file) {
    const auto m = ngram::read_arpa(model_path(file), vocab);
    out << label << '\t' << format_exact(prefix_perplexity(transcripts, [&](const TokenSequence& y) {
      return m.sequence_logprob(y, false);
    })) << '\n';
  };
  if (n.lodr) ngram_ppl("lodr", "lodr_ilm.arpa");
  if (n.ablation) ngram_ppl(kExternalLabel, "lodr_ext_ilm.arpa");
}

void Pipeline::report() {
  const Needs n = needs(cfg_);
  const auto ppl = read_key_values(model_path("ilm_ppl.tsv"));
  std::ostringstream combined;
  for (const auto& e : cfg_.experiments) {
    const auto results = read_results(experiment_dir(e) / "results.tsv");
    const auto row_for = [&](const std::string& label, const std::string& method) {
      ReportRow row;
      row.label = label;
      const FusionMethod m = decoder::parse_method(method);
      row.uses_ilm = decoder::uses_ilm(m);
      if (row.uses_ilm && ppl.count(label)) row.ilm_perplexity = ppl.at(label);
      if (m != FusionMethod::kNone) {
        row.weights = read_fusion_weights(experiment_dir(e) / ("tune_" + method + ".txt"), method);
      }
      for (const auto& set : kSets) {
        const auto it = std::find_if(results.begin(), results.end(),
                                     [&](const ResultRow& r) { return r.label == label && r.set == set; });
        if (it == results.end()) throw InputError("results.tsv has no row for " + label + " on " + set);
        row.sets.push_back(it->counts);
      }
      return row;
    };

    ReportTable table;
    table.title = experiment_title(e);
    table.set_names = kSets;
    for (const auto& m : cfg_.methods) table.rows.push_back(row_for(m, m));
    if (!contains(cfg_.methods, "none")) table.baseline.clear();
    table.notes = {
        "Error rates are token error rates (%) on the synthetic desk task.",
        "avg: total errors over total reference tokens of dev and test together (micro-average).",
        "Rel %: relative reduction of avg against the none row; '-' where undefined.",
        "ILM PPL: per-token perplexity of the method's internal LM on the training transcripts, end marker excluded.",
        "Weights: tuned on dev by coordinate descent; dr, ilme and lodr start from the tuned sf weights with lambda0 = 0.",
        "Absolute error rates are not comparable to full-scale speech results; no ordering among methods on test is implied.",
    };
    {
      auto out = open_out(experiment_dir(e) / "report.txt");
      write_report_text(out, table);
      write_report_text(combined, table);
      combined << '\n';
      auto tsv = open_out(experiment_dir(e) / "report.tsv");
      write_report_tsv(tsv, table);
    }

    if (e == kCrossDomain && n.ablation) {
      ReportTable ab;
      ab.title = "cross_domain ablation: lodr with a low-order ILM from transcripts vs an external text sample";
      ab.label_header = "ILM corpus";
      ab.set_names = kSets;
      ab.show_perplexity = false;
      ab.show_average = false;
      ab.baseline.clear();
      ab.rows.push_back(row_for("lodr", "lodr"));
      ab.rows.back().label = "transcripts";
      ab.rows.push_back(row_for(kExternalLabel, "lodr"));
      ab.rows.back().label = "external corpus";
      const double diff = std::abs(average_rate(ab.rows[0]) - average_rate(ab.rows[1]));
      ab.notes = {
          "Both rows use the weights tuned for the transcript ILM.",
          "The external sample is drawn from the source-domain ELM text and has as many sentences as the transcripts.",
          "|avg(transcripts) - avg(external corpus)| = " + format_fixed(diff, 2) + "; no ordering is required.",
      };
      auto out = open_out(experiment_dir(e) / "ablation.txt");
      write_report_text(out, ab);
      write_report_text(combined, ab);
      combined << '\n';
      auto tsv = open_out(experiment_dir(e) / "ablation.tsv");
      write_report_tsv(tsv, ab);
    }
  }
  open_out(root_ / "report.txt") << combined.str();
}

}  // namespace lodr::harness
