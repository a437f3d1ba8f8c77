// Copyright (c) 2026 The send-diar Authors
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

#include "send/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace send {

namespace {

void put_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b]))
            << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string encode_checkpoint(const ParamStore& params) {
  std::ostringstream header;
  header << kCheckpointMagic << '\n' << params.size() << '\n';
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string& name = params.name(i);
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw CheckpointError("checkpoint: invalid parameter name '" + name +
                            "'");
    }
    const Tensor& v = params.value(i);
    header << name << ' ' << v.rows() << ' ' << v.cols() << ' ' << offset
           << '\n';
    offset += static_cast<std::size_t>(v.size()) * 8;
  }
  header << '\n';
  std::string out = header.str();
  out.reserve(out.size() + offset);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& v = params.value(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) put_le(out, v.data()[k]);
  }
  return out;
}

ParamStore decode_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() {
    const std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string::npos) {
      throw CheckpointError("checkpoint: truncated manifest");
    }
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != kCheckpointMagic) {
    throw CheckpointError("checkpoint: bad magic, expected SENDCKPT1");
  }
  long count = -1;
  {
    std::istringstream in(next_line());
    if (!(in >> count) || count < 0) {
      throw CheckpointError("checkpoint: bad entry count");
    }
  }
  struct Entry {
    std::string name;
    long rows, cols;
    std::size_t offset;
  };
  std::vector<Entry> entries;
  for (long i = 0; i < count; ++i) {
    std::istringstream in(next_line());
    Entry e;
    if (!(in >> e.name >> e.rows >> e.cols >> e.offset) || e.rows < 1 ||
        e.cols < 1) {
      throw CheckpointError("checkpoint: bad manifest entry " +
                            std::to_string(i));
    }
    entries.push_back(e);
  }
  if (!next_line().empty()) {
    throw CheckpointError("checkpoint: manifest not terminated");
  }
  const std::size_t base = pos;
  ParamStore params;
  for (const Entry& e : entries) {
    const std::size_t n = static_cast<std::size_t>(e.rows * e.cols);
    if (base + e.offset + 8 * n > bytes.size()) {
      throw CheckpointError("checkpoint: payload truncated at '" + e.name +
                            "'");
    }
    Tensor v(e.rows, e.cols);
    const char* p = bytes.data() + base + e.offset;
    for (std::size_t k = 0; k < n; ++k) v.data()[k] = get_le(p + 8 * k);
    params.add(e.name, std::move(v));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path,
                     const ParamStore& params) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace send
