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

#include "lodr/core/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "lodr/core/error.hpp"

namespace lodr {
namespace {

constexpr char kMagic[8] = {'L', 'O', 'D', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
  void bytes(void* p, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(path_ + ": truncated checkpoint while reading " + what);
    }
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::uint64_t u64(const char* what) {
    std::uint64_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    if (n > (1u << 20)) throw ParseError(path_ + ": implausible string length for " + what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }

 private:
  std::ifstream& in_;
  std::string path_;
};

}  // namespace

const Matrix& Checkpoint::array(const std::string& name) const {
  for (const auto& [n, m] : arrays) {
    if (n == name) return m;
  }
  throw InputError("checkpoint has no array named '" + name + "'");
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw InputError("checkpoint has no metadata key '" + key + "'");
  return it->second;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  Writer w(out);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    w.str(k);
    w.str(v);
  }
  w.u32(static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& [name, m] : ckpt.arrays) {
    w.str(name);
    w.u64(m.rows());
    w.u64(m.cols());
    w.bytes(m.data(), m.size() * sizeof(double));
  }
  if (!out) throw InputError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[8];
  r.bytes(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError(path.string() + ": not a LODR checkpoint (bad magic)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t n_meta = r.u32("metadata count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str("metadata key");
    ckpt.meta[k] = r.str("metadata value");
  }
  const std::uint32_t n_arrays = r.u32("array count");
  for (std::uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = r.str("array name");
    const std::uint64_t rows = r.u64("array rows");
    const std::uint64_t cols = r.u64("array cols");
    if (rows * cols > (std::uint64_t{1} << 32)) {
      throw ParseError(path.string() + ": implausible shape for array " + name);
    }
    Matrix m(rows, cols);
    r.bytes(m.data(), m.size() * sizeof(double), "array data");
    ckpt.arrays.emplace_back(std::move(name), std::move(m));
  }
  return ckpt;
}

void store_params(Checkpoint& ckpt, const std::vector<ConstParamRef>& refs) {
  for (const auto& r : refs) ckpt.arrays.emplace_back(r.name, *r.value);
}

void load_params(const Checkpoint& ckpt, const std::vector<ParamRef>& refs) {
  for (const auto& r : refs) {
    const Matrix& src = ckpt.array(r.name);
    if (!src.same_shape(*r.value)) {
      throw ShapeError("checkpoint array '" + r.name + "' has shape " +
                       std::to_string(src.rows()) + "x" + std::to_string(src.cols()) +
                       ", model expects " + std::to_string(r.value->rows()) + "x" +
                       std::to_string(r.value->cols()));
    }
    *r.value = src;
  }
}

}  // namespace lodr
