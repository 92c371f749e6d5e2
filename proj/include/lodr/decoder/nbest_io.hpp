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

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lodr/core/vocabulary.hpp"
#include "lodr/decoder/hypothesis.hpp"

namespace lodr::decoder {

// Tab-separated n-best file. The header names the columns:
//
//   # utt_id  rank  logp_rnnt  length  <scorer ids...>  tokens
//
// One line per hypothesis in first-pass order, rank from 0. Numbers are
// written with 17 significant digits so reading back is exact; a cached
// score absent from a hypothesis is written as "-". Tokens are
// space-separated vocabulary names and may be empty.
void write_nbest(std::ostream& out, const std::vector<NBestList>& lists, const Vocabulary& vocab);
void write_nbest(const std::filesystem::path& path, const std::vector<NBestList>& lists,
                 const Vocabulary& vocab);

// Throws ParseError with the line number on malformed input.
std::vector<NBestList> read_nbest(std::istream& in, const Vocabulary& vocab);
std::vector<NBestList> read_nbest(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace lodr::decoder
