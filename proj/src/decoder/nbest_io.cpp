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

#include "lodr/decoder/nbest_io.hpp"

#include <fstream>
#include <set>
#include <string>

#include "lodr/core/error.hpp"
#include "lodr/core/text.hpp"

namespace lodr::decoder {
namespace {

constexpr std::size_t kFixedColumns = 4;  // utt_id rank logp_rnnt length

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ParseError("n-best line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_nbest(std::ostream& out, const std::vector<NBestList>& lists, const Vocabulary& vocab) {
  std::set<std::string> ids;
  for (const auto& list : lists) {
    for (const auto& h : list.hypotheses) {
      for (const auto& [id, _] : h.cached_scores) ids.insert(id);
    }
  }
  out << "# utt_id\trank\tlogp_rnnt\tlength";
  for (const auto& id : ids) out << '\t' << id;
  out << "\ttokens\n";
  for (const auto& list : lists) {
    for (std::size_t rank = 0; rank < list.hypotheses.size(); ++rank) {
      const Hypothesis& h = list.hypotheses[rank];
      out << list.utterance_id << '\t' << rank << '\t' << format_exact(h.logp_rnnt) << '\t'
          << h.length();
      for (const auto& id : ids) {
        const auto it = h.cached_scores.find(id);
        out << '\t' << (it == h.cached_scores.end() ? std::string("-") : format_exact(it->second));
      }
      out << '\t' << vocab.render(h.tokens) << '\n';
    }
  }
}

void write_nbest(const std::filesystem::path& path, const std::vector<NBestList>& lists,
                 const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write n-best file " + path.string());
  write_nbest(out, lists, vocab);
  if (!out) throw InputError("error writing n-best file " + path.string());
}

std::vector<NBestList> read_nbest(std::istream& in, const Vocabulary& vocab) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> scorer_ids;
  bool have_header = false;
  std::vector<NBestList> lists;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (!have_header) {
      if (line.rfind("# ", 0) != 0) fail(line_no, "missing '# utt_id ...' header");
      const auto cols = split(std::string_view(line).substr(2), '\t');
      if (cols.size() < kFixedColumns + 1 || cols[0] != "utt_id" || cols[1] != "rank" ||
          cols[2] != "logp_rnnt" || cols[3] != "length" || cols.back() != "tokens") {
        fail(line_no, "header must be '# utt_id rank logp_rnnt length <scorers...> tokens'");
      }
      for (std::size_t i = kFixedColumns; i + 1 < cols.size(); ++i) scorer_ids.emplace_back(cols[i]);
      have_header = true;
      continue;
    }
    if (fields.size() != kFixedColumns + scorer_ids.size() + 1) {
      fail(line_no, "expected " + std::to_string(kFixedColumns + scorer_ids.size() + 1) +
                        " tab-separated fields, found " + std::to_string(fields.size()));
    }
    const std::string id(fields[0]);
    const auto rank = parse_int(fields[1]);
    const auto logp = parse_double(fields[2]);
    const auto length = parse_int(fields[3]);
    if (!rank || !logp || !length) fail(line_no, "malformed rank, logp_rnnt or length");
    if (lists.empty() || lists.back().utterance_id != id) {
      lists.push_back({id, {}});
    }
    auto& hyps = lists.back().hypotheses;
    if (*rank != static_cast<long long>(hyps.size())) {
      fail(line_no, "rank " + std::to_string(*rank) + " out of sequence for " + id);
    }
    Hypothesis h;
    h.logp_rnnt = *logp;
    for (std::size_t i = 0; i < scorer_ids.size(); ++i) {
      const auto field = fields[kFixedColumns + i];
      if (field == "-") continue;
      const auto v = parse_double(field);
      if (!v) fail(line_no, "malformed score for " + scorer_ids[i]);
      h.cached_scores.emplace(scorer_ids[i], *v);
    }
    try {
      h.tokens = vocab.parse(fields.back());
    } catch (const Error& e) {
      fail(line_no, e.what());
    }
    if (static_cast<long long>(h.tokens.size()) != *length) {
      fail(line_no, "length column disagrees with token count");
    }
    hyps.push_back(std::move(h));
  }
  if (!have_header) throw ParseError("n-best file is empty (no header)");
  return lists;
}

std::vector<NBestList> read_nbest(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read n-best file " + path.string());
  return read_nbest(in, vocab);
}

}  // namespace lodr::decoder
