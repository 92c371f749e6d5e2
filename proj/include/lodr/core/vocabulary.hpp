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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lodr/core/types.hpp"

namespace lodr {

// Symbol table shared by every module.
//
// Layout for V regular tokens:
//   0          <blk>   transducer blank, never part of a TokenSequence
//   1 .. V     regular tokens
//   V + 1      <s>     start symbol, consumed only as history
//   V + 2      </s>    end of sentence (language models only)
//   V + 3      <unk>   out-of-vocabulary placeholder (n-gram models only)
class Vocabulary {
 public:
  static constexpr TokenId kBlank = 0;

  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> token_names);

  // V tokens named w01, w02, ...
  static Vocabulary synthetic(std::size_t num_tokens);

  std::size_t size() const { return names_.size(); }
  std::size_t total_ids() const { return names_.size() + 4; }

  TokenId start() const { return static_cast<TokenId>(size() + 1); }
  TokenId end_of_sentence() const { return static_cast<TokenId>(size() + 2); }
  TokenId unknown() const { return static_cast<TokenId>(size() + 3); }

  bool is_regular(TokenId id) const {
    return id >= 1 && static_cast<std::size_t>(id) <= size();
  }
  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < total_ids();
  }

  const std::string& name(TokenId id) const;
  std::optional<TokenId> find(std::string_view symbol) const;

  // Space-joined token names.
  std::string render(const TokenSequence& tokens) const;
  // Inverse of render(). Unknown symbols map to unknown() when allow_unknown,
  // otherwise they raise InputError.
  TokenSequence parse(std::string_view text, bool allow_unknown = false) const;

  const std::vector<std::string>& token_names() const { return names_; }

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace lodr
