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

#include "lodr/harness/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"

namespace lodr::harness {
namespace {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

constexpr char kFeatureMagic[8] = {'L', 'O', 'D', 'R', 'F', 'E', 'A', 'T'};
constexpr std::uint32_t kFeatureVersion = 1;

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::size_t sample_row(std::span<const double> row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng), acc = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    acc += row[k];
    if (r < acc) return k;
  }
  // Rounding left r above the cumulative sum; take the last non-zero entry.
  for (std::size_t k = row.size(); k-- > 0;) {
    if (row[k] > 0.0) return k;
  }
  return row.size() - 1;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw ParseError("feature file " + path.string() + ": truncated");
  }
  return v;
}

std::vector<std::pair<std::string, TokenSequence>> read_tab_file(const std::filesystem::path& path,
                                                                 const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::vector<std::pair<std::string, TokenSequence>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": expected 'id<TAB>tokens'");
    }
    try {
      out.emplace_back(line.substr(0, tab), vocab.parse(std::string_view(line).substr(tab + 1)));
    } catch (const InputError& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_tab_file(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, const TokenSequence*>>& rows,
                    const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& [id, tokens] : rows) out << id << '\t' << vocab.render(*tokens) << '\n';
  if (!out) throw InputError("error writing " + path.string());
}

}  // namespace

void DomainSpec::validate() const {
  if (vocab_size == 0) throw ConfigError("domain: vocabulary size must be positive");
  if (transitions.rows() != vocab_size + 1 || transitions.cols() != vocab_size) {
    throw ConfigError("domain: transition matrix must be (V + 1) x V");
  }
  for (std::size_t r = 0; r < transitions.rows(); ++r) {
    double sum = 0.0;
    for (double p : transitions.row(r)) {
      if (!(p >= 0.0)) throw ConfigError("domain: negative transition in row " + std::to_string(r));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("domain: transition row " + std::to_string(r) + " sums to " + format_exact(sum));
    }
  }
  if (lengths.min_length == 0 || lengths.min_length > lengths.max_length) {
    throw ConfigError("domain: need 1 <= min_length <= max_length");
  }
  if (!(lengths.stop_prob > 0.0 && lengths.stop_prob <= 1.0)) {
    throw ConfigError("domain: stop probability must be in (0, 1]");
  }
}

Matrix random_transitions(std::size_t vocab_size, std::size_t branching, double floor,
                          std::uint64_t seed) {
  if (vocab_size < 2) throw ConfigError("domain: need at least two tokens");
  if (branching == 0 || branching >= vocab_size) {
    throw ConfigError("domain: branching must be in [1, V - 1]");
  }
  if (!(floor >= 0.0 && floor < 1.0)) throw ConfigError("domain: floor must be in [0, 1)");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> weight(1.0, 1.0);
  Matrix t(vocab_size + 1, vocab_size);
  for (std::size_t r = 0; r <= vocab_size; ++r) {
    std::vector<std::size_t> allowed;
    for (std::size_t k = 0; k < vocab_size; ++k) {
      if (r == 0 || k != r - 1) allowed.push_back(k);
    }
    std::shuffle(allowed.begin(), allowed.end(), rng);
    const std::size_t picks = std::min(branching, allowed.size());
    std::vector<double> w(picks);
    for (double& x : w) x = weight(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    auto row = t.row(r);
    for (std::size_t k : allowed) row[k] = floor / static_cast<double>(allowed.size());
    for (std::size_t i = 0; i < picks; ++i) row[allowed[i]] += (1.0 - floor) * w[i] / total;
  }
  return t;
}

std::vector<TokenSequence> sample_sentences(const DomainSpec& spec, std::size_t count,
                                            std::mt19937_64& rng) {
  spec.validate();
  std::bernoulli_distribution stop(spec.lengths.stop_prob);
  std::vector<TokenSequence> out(count);
  for (auto& y : out) {
    std::size_t state = 0;
    while (true) {
      const std::size_t k = sample_row(spec.transitions.row(state), rng);
      y.push_back(static_cast<TokenId>(k + 1));
      state = k + 1;
      if (y.size() >= spec.lengths.max_length) break;
      if (y.size() >= spec.lengths.min_length && stop(rng)) break;
    }
  }
  return out;
}

Matrix token_embeddings(std::size_t vocab_size, const AcousticSpec& spec, std::uint64_t seed) {
  if (spec.feature_dim == 0 || spec.cluster_size == 0) {
    throw ConfigError("acoustics: feature_dim and cluster_size must be positive");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t clusters = (vocab_size + spec.cluster_size - 1) / spec.cluster_size;
  Matrix centres(clusters, spec.feature_dim);
  for (double& v : centres.flat()) v = spec.cluster_separation * n(rng);
  Matrix e(vocab_size, spec.feature_dim);
  for (std::size_t k = 0; k < vocab_size; ++k) {
    const auto c = centres.row(k / spec.cluster_size);
    auto row = e.row(k);
    for (std::size_t j = 0; j < spec.feature_dim; ++j) row[j] = c[j] + spec.cluster_spread * n(rng);
  }
  return e;
}

FeatureSequence render_features(const TokenSequence& tokens, const Matrix& embeddings,
                                const AcousticSpec& spec, std::mt19937_64& rng) {
  if (spec.min_duration == 0 || spec.min_duration > spec.max_duration) {
    throw ConfigError("acoustics: need 1 <= min_duration <= max_duration");
  }
  std::uniform_int_distribution<std::size_t> duration(spec.min_duration, spec.max_duration);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<std::size_t> frames(tokens.size());
  std::size_t T = 0;
  for (auto& f : frames) T += (f = duration(rng));
  FeatureSequence x(T, embeddings.cols());
  std::size_t t = 0;
  for (std::size_t u = 0; u < tokens.size(); ++u) {
    if (tokens[u] < 1 || static_cast<std::size_t>(tokens[u]) > embeddings.rows()) {
      throw InputError("render_features: token " + std::to_string(tokens[u]) + " has no embedding");
    }
    const auto e = embeddings.row(static_cast<std::size_t>(tokens[u]) - 1);
    for (std::size_t r = 0; r < frames[u]; ++r, ++t) {
      auto row = x.row(t);
      for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = e[j] + (spec.noise > 0.0 ? spec.noise * noise(rng) : 0.0);
      }
    }
  }
  return x;
}

std::vector<Utterance> make_utterances(const std::vector<TokenSequence>& sentences,
                                       const std::string& id_prefix, const Matrix& embeddings,
                                       const AcousticSpec& spec, std::mt19937_64& rng) {
  std::vector<Utterance> out;
  out.reserve(sentences.size());
  char buf[32];
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "-%05zu", i + 1);
    out.push_back({id_prefix + buf, sentences[i], render_features(sentences[i], embeddings, spec, rng)});
  }
  return out;
}

DomainData generate_domain(const DomainSpec& spec, const Matrix& embeddings,
                           const AcousticSpec& acoustic, const DomainSizes& sizes,
                           const std::string& name, std::uint64_t seed) {
  spec.validate();
  if (embeddings.rows() != spec.vocab_size || embeddings.cols() != acoustic.feature_dim) {
    throw ConfigError("domain " + name + ": embeddings do not match vocabulary and feature size");
  }
  DomainData d;
  const auto part = [&](std::size_t n, std::uint64_t stream, const char* label) {
    std::mt19937_64 rng(stream_seed(seed, stream));
    const auto sentences = sample_sentences(spec, n, rng);
    return make_utterances(sentences, name + "-" + label, embeddings, acoustic, rng);
  };
  d.train = part(sizes.train, 1, "train");
  d.dev = part(sizes.dev, 2, "dev");
  d.test = part(sizes.test, 3, "test");
  std::mt19937_64 text_rng(stream_seed(seed, 4));
  d.text = sample_sentences(spec, sizes.text, text_rng);
  return d;
}

double transition_tv_distance(const DomainSpec& spec, const std::vector<TokenSequence>& sentences) {
  const std::size_t V = spec.vocab_size;
  Matrix counts(V + 1, V);
  for (const auto& y : sentences) {
    std::size_t state = 0;
    for (TokenId t : y) {
      counts(state, static_cast<std::size_t>(t) - 1) += 1.0;
      state = static_cast<std::size_t>(t);
    }
  }
  double weighted = 0.0, total = 0.0;
  for (std::size_t r = 0; r <= V; ++r) {
    const auto row = counts.row(r);
    const double n = std::accumulate(row.begin(), row.end(), 0.0);
    if (n == 0.0) continue;
    double tv = 0.0;
    for (std::size_t k = 0; k < V; ++k) tv += std::abs(row[k] / n - spec.transitions(r, k));
    weighted += n * 0.5 * tv;
    total += n;
  }
  return total == 0.0 ? 0.0 : weighted / total;
}

void write_transcripts(const std::filesystem::path& path, const std::vector<Utterance>& utts,
                       const Vocabulary& vocab) {
  std::vector<std::pair<std::string, const TokenSequence*>> rows;
  for (const auto& u : utts) rows.emplace_back(u.id, &u.tokens);
  write_tab_file(path, rows, vocab);
}

std::vector<std::pair<std::string, TokenSequence>> read_transcripts(
    const std::filesystem::path& path, const Vocabulary& vocab) {
  return read_tab_file(path, vocab);
}

void write_corpus(const std::filesystem::path& path, const std::vector<TokenSequence>& sentences,
                  const std::string& id_prefix, const Vocabulary& vocab) {
  std::vector<std::pair<std::string, const TokenSequence*>> rows;
  char buf[32];
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "-%06zu", i + 1);
    rows.emplace_back(id_prefix + buf, &sentences[i]);
  }
  write_tab_file(path, rows, vocab);
}

std::vector<TokenSequence> read_corpus(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::vector<TokenSequence> out;
  for (auto& [id, tokens] : read_tab_file(path, vocab)) out.push_back(std::move(tokens));
  return out;
}

void write_features(const std::filesystem::path& path, const std::vector<Utterance>& utts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(kFeatureMagic, sizeof(kFeatureMagic));
  put(out, kFeatureVersion);
  put(out, static_cast<std::uint64_t>(utts.size()));
  std::vector<float> buf;
  for (const auto& u : utts) {
    put(out, static_cast<std::uint32_t>(u.id.size()));
    out.write(u.id.data(), static_cast<std::streamsize>(u.id.size()));
    put(out, static_cast<std::uint64_t>(u.features.rows()));
    put(out, static_cast<std::uint64_t>(u.features.cols()));
    buf.assign(u.features.flat().begin(), u.features.flat().end());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw InputError("error writing " + path.string());
}

std::vector<std::pair<std::string, FeatureSequence>> read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kFeatureMagic, 8) != 0) {
    throw ParseError("feature file " + path.string() + ": bad magic");
  }
  if (get<std::uint32_t>(in, path) != kFeatureVersion) {
    throw ParseError("feature file " + path.string() + ": unsupported version");
  }
  const auto count = get<std::uint64_t>(in, path);
  std::vector<std::pair<std::string, FeatureSequence>> out;
  std::vector<float> buf;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get<std::uint32_t>(in, path);
    if (len > 4096) throw ParseError("feature file " + path.string() + ": implausible id length");
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw ParseError("feature file " + path.string() + ": truncated");
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows * cols > (1ULL << 28)) throw ParseError("feature file " + path.string() + ": implausible shape");
    buf.resize(rows * cols);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
      throw ParseError("feature file " + path.string() + ": truncated");
    }
    FeatureSequence x(rows, cols);
    std::copy(buf.begin(), buf.end(), x.flat().begin());
    out.emplace_back(std::move(id), std::move(x));
  }
  return out;
}

std::vector<Utterance> read_utterances(const std::filesystem::path& transcripts,
                                       const std::filesystem::path& features,
                                       const Vocabulary& vocab) {
  auto text = read_transcripts(transcripts, vocab);
  auto feats = read_features(features);
  if (text.size() != feats.size()) {
    throw InputError(transcripts.string() + " and " + features.string() + " hold different utterance counts");
  }
  std::vector<Utterance> out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i].first != feats[i].first) {
      throw InputError("utterance " + std::to_string(i + 1) + ": transcript id " + text[i].first +
                       " but feature id " + feats[i].first);
    }
    out[i] = {std::move(text[i].first), std::move(text[i].second), std::move(feats[i].second)};
  }
  return out;
}

void write_utterances(const std::filesystem::path& transcripts, const std::filesystem::path& features,
                      const std::vector<Utterance>& utts, const Vocabulary& vocab) {
  write_transcripts(transcripts, utts, vocab);
  write_features(features, utts);
}

}  // namespace lodr::harness
