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

#include "lodr/ngram/arpa.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lodr/core/error.hpp"

namespace lodr::ngram {
namespace {

std::string format_log10(double ln_value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.7f", ln_value / std::numbers::ln10);
  return buf;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_special(std::string_view w) {
  return w == "<s>" || w == "</s>" || w == "<unk>" || w == "<blk>";
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line, or false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!trim(line).empty()) return true;
    }
    return false;
  }
  std::size_t number() const { return number_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("ARPA line " + std::to_string(number_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

double parse_double(std::string_view text, const LineReader& reader, const char* what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    reader.fail(std::string("non-numeric ") + what + " '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

void write_arpa(std::ostream& out, const NGramModel& model) {
  const Vocabulary& vocab = model.vocabulary();
  out << "\\data\\\n";
  for (std::size_t k = 1; k <= model.order(); ++k) {
    out << "ngram " << k << "=" << model.entries(k).size() << "\n";
  }
  for (std::size_t k = 1; k <= model.order(); ++k) {
    out << "\n\\" << k << "-grams:\n";
    for (const auto& [gram, entry] : model.entries(k)) {
      out << format_log10(entry.logprob) << "\t";
      for (std::size_t i = 0; i < gram.size(); ++i) {
        if (i > 0) out << ' ';
        out << vocab.name(gram[i]);
      }
      if (k < model.order() && entry.backoff != 0.0) out << "\t" << format_log10(entry.backoff);
      out << "\n";
    }
  }
  out << "\n\\end\\\n";
}

void write_arpa(const std::filesystem::path& path, const NGramModel& model) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  write_arpa(out, model);
  if (!out) throw InputError("write failed: " + path.string());
}

NGramModel read_arpa(std::istream& in, const std::optional<Vocabulary>& vocab_in) {
  LineReader reader(in);
  std::string line;

  if (!reader.next(line)) reader.fail("empty file, missing \\data\\ header");
  if (trim(line) != "\\data\\") reader.fail("expected \\data\\ header");

  std::vector<std::size_t> declared;
  bool have_line = false;
  while (reader.next(line)) {
    std::string_view t = trim(line);
    if (t.rfind("ngram ", 0) != 0) {
      have_line = true;
      break;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) reader.fail("malformed ngram count line");
    const double k = parse_double(trim(t.substr(6, eq - 6)), reader, "order");
    const double n = parse_double(trim(t.substr(eq + 1)), reader, "count");
    if (k != static_cast<double>(declared.size() + 1) || n < 0 || n != std::floor(n)) {
      reader.fail("ngram counts must be listed for orders 1, 2, ... in sequence");
    }
    declared.push_back(static_cast<std::size_t>(n));
  }
  if (declared.empty()) reader.fail("\\data\\ header declares no n-gram orders");

  // Raw entries per order, resolved against the vocabulary afterwards.
  struct RawEntry {
    std::vector<std::string> words;
    double log10_prob;
    double log10_backoff;
  };
  std::vector<std::vector<RawEntry>> raw(declared.size());

  for (std::size_t k = 1; k <= declared.size(); ++k) {
    const std::string header = "\\" + std::to_string(k) + "-grams:";
    if (!have_line) reader.fail("truncated file, missing section " + header);
    if (trim(line) != header) reader.fail("expected section " + header);
    have_line = false;
    while (reader.next(line)) {
      std::string_view t = trim(line);
      if (!t.empty() && t.front() == '\\') {
        have_line = true;
        break;
      }
      const auto fields = split_ws(t);
      if (fields.size() != k + 1 && fields.size() != k + 2) {
        reader.fail("expected " + std::to_string(k + 1) + " or " + std::to_string(k + 2) +
                    " fields in " + std::to_string(k) + "-gram entry");
      }
      RawEntry e;
      e.log10_prob = parse_double(fields[0], reader, "log-probability");
      for (std::size_t i = 1; i <= k; ++i) e.words.emplace_back(fields[i]);
      e.log10_backoff = fields.size() == k + 2 ? parse_double(fields[k + 1], reader, "backoff") : 0.0;
      if (e.log10_prob > 0.0) reader.fail("log-probability above zero");
      raw[k - 1].push_back(std::move(e));
    }
    if (raw[k - 1].size() != declared[k - 1]) {
      reader.fail("section " + header + " has " + std::to_string(raw[k - 1].size()) +
                  " entries but the header declares " + std::to_string(declared[k - 1]));
    }
  }
  if (!have_line) reader.fail("truncated file, missing \\end\\");
  if (trim(line) != "\\end\\") reader.fail("expected \\end\\");

  Vocabulary vocab;
  if (vocab_in) {
    vocab = *vocab_in;
  } else {
    std::vector<std::string> names;
    for (const auto& e : raw[0]) {
      if (!is_special(e.words[0])) names.push_back(e.words[0]);
    }
    vocab = Vocabulary(std::move(names));
  }

  NGramModel model(vocab, declared.size());
  for (std::size_t k = 1; k <= declared.size(); ++k) {
    auto& level = model.mutable_entries(k);
    for (const auto& e : raw[k - 1]) {
      Gram gram;
      for (const auto& w : e.words) {
        auto id = vocab.find(w);
        if (!id || *id == Vocabulary::kBlank) {
          throw ParseError("ARPA: symbol '" + w + "' is not in the vocabulary");
        }
        gram.push_back(*id);
      }
      level[gram] = {e.log10_prob * std::numbers::ln10, e.log10_backoff * std::numbers::ln10};
    }
  }
  model.set_has_unknown(model.find(Gram{vocab.unknown()}) != nullptr);
  return model;
}

NGramModel read_arpa(const std::filesystem::path& path, const std::optional<Vocabulary>& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open ARPA file " + path.string());
  return read_arpa(in, vocab);
}

}  // namespace lodr::ngram
