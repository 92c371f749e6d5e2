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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lodr/core/params.hpp"
#include "lodr/numerics/matrix.hpp"

namespace lodr {

// Named parameter arrays plus string metadata.
//
// Binary layout (all integers little-endian):
//   "LODRCKPT"                         8-byte magic
//   u32 version                        currently 1
//   u32 n_meta, then n_meta times:     u32 key_len, key, u32 value_len, value
//   u32 n_arrays, then n_arrays times: u32 name_len, name, u64 rows, u64 cols,
//                                      rows * cols IEEE-754 binary64 values
//
// Doubles are stored bit-for-bit, so write/read round-trips exactly.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> arrays;

  const Matrix& array(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies model blocks into / out of a checkpoint. load_params checks names
// and shapes and throws ShapeError on mismatch.
void store_params(Checkpoint& ckpt, const std::vector<ConstParamRef>& refs);
void load_params(const Checkpoint& ckpt, const std::vector<ParamRef>& refs);

}  // namespace lodr
