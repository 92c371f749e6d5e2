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
#include <vector>

#include "lodr/core/types.hpp"
#include "lodr/decoder/hypothesis.hpp"
#include "lodr/transducer/transducer.hpp"

namespace lodr::decoder {

// Frame-synchronous search in the monotonic topology: every frame emits
// exactly one symbol, blank or label. Alignments of the same label sequence
// are merged by logsumexp. Returns up to `beam` hypotheses by descending
// logp_rnnt. Throws InputError for beam = 0 or an empty feature sequence.
std::vector<Hypothesis> beam_search(const transducer::TransducerModel& model,
                                    const FeatureSequence& x, std::size_t beam);

// Decodes every utterance; utterance-parallel over `threads` workers.
std::vector<NBestList> decode_corpus(const transducer::TransducerModel& model,
                                     const std::vector<Utterance>& utterances, std::size_t beam,
                                     std::size_t threads = 1);

}  // namespace lodr::decoder
