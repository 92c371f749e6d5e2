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
#include <optional>

#include "lodr/core/vocabulary.hpp"
#include "lodr/ngram/ngram.hpp"

namespace lodr::ngram {

// ARPA backoff format: a \data\ header with "ngram k=N" counts, one
// \k-grams: section per order (log10 prob, gram, optional log10 backoff),
// and a closing \end\.
void write_arpa(std::ostream& out, const NGramModel& model);
void write_arpa(const std::filesystem::path& path, const NGramModel& model);

// Without a vocabulary, one is built from the unigram section in file
// order. With one, every non-special symbol must already belong to it.
// Errors are ParseError with the 1-based line number.
NGramModel read_arpa(std::istream& in, const std::optional<Vocabulary>& vocab = std::nullopt);
NGramModel read_arpa(const std::filesystem::path& path,
                     const std::optional<Vocabulary>& vocab = std::nullopt);

}  // namespace lodr::ngram
