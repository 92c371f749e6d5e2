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

#include "lodr/core/vocabulary.hpp"

#include <cstdio>
#include <sstream>

#include "lodr/core/error.hpp"

namespace lodr {
namespace {

// Function-local so global Vocabulary objects in other translation units
// can be built during static initialization.
const std::string& blank_name() {
  static const std::string s = "<blk>";
  return s;
}
const std::string& start_name() {
  static const std::string s = "<s>";
  return s;
}
const std::string& end_name() {
  static const std::string s = "</s>";
  return s;
}
const std::string& unk_name() {
  static const std::string s = "<unk>";
  return s;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> token_names) : names_(std::move(token_names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    const std::string& n = names_[i];
    if (n.empty() || n == blank_name() || n == start_name() || n == end_name() || n == unk_name()) {
      throw InputError("Vocabulary: reserved or empty token name '" + n + "'");
    }
    if (n.find_first_of(" \t\n") != std::string::npos) {
      throw InputError("Vocabulary: token name contains whitespace: '" + n + "'");
    }
    if (!index_.emplace(n, static_cast<TokenId>(i + 1)).second) {
      throw InputError("Vocabulary: duplicate token '" + n + "'");
    }
  }
  index_.emplace(blank_name(), kBlank);
  index_.emplace(start_name(), start());
  index_.emplace(end_name(), end_of_sentence());
  index_.emplace(unk_name(), unknown());
}

Vocabulary Vocabulary::synthetic(std::size_t num_tokens) {
  std::vector<std::string> names;
  names.reserve(num_tokens);
  char buf[32];
  for (std::size_t i = 1; i <= num_tokens; ++i) {
    std::snprintf(buf, sizeof(buf), "w%02zu", i);
    names.emplace_back(buf);
  }
  return Vocabulary(std::move(names));
}

const std::string& Vocabulary::name(TokenId id) const {
  if (id == kBlank) return blank_name();
  if (is_regular(id)) return names_[static_cast<std::size_t>(id) - 1];
  if (id == start()) return start_name();
  if (id == end_of_sentence()) return end_name();
  if (id == unknown()) return unk_name();
  throw InputError("Vocabulary: token id " + std::to_string(id) + " out of range");
}

std::optional<TokenId> Vocabulary::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::render(const TokenSequence& tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += name(tokens[i]);
  }
  return out;
}

TokenSequence Vocabulary::parse(std::string_view text, bool allow_unknown) const {
  TokenSequence out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    if (auto id = find(word); id && is_regular(*id)) {
      out.push_back(*id);
    } else if (allow_unknown) {
      out.push_back(unknown());
    } else {
      throw InputError("Vocabulary: unknown symbol '" + word + "'");
    }
  }
  return out;
}

}  // namespace lodr
