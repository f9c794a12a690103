// Copyright 2026 The diarkit Authors
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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "diarkit/features.h"
#include "diarkit/io_util.h"

namespace diarkit {
namespace {

void append_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t load_u32(const std::string& buf, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_feature_dump(const std::filesystem::path& path, const FeatureMatrix& f) {
  std::string buf = "FEA1";
  append_u32(buf, static_cast<std::uint32_t>(f.frames()));
  append_u32(buf, static_cast<std::uint32_t>(f.dim()));
  append_u32(buf, static_cast<std::uint32_t>(std::lround(f.hop_sec * 1e6)));
  buf.reserve(buf.size() + 4 * static_cast<std::size_t>(f.data.size()));
  for (Eigen::Index t = 0; t < f.frames(); ++t) {
    for (Eigen::Index d = 0; d < f.dim(); ++d) {
      append_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(f.data(t, d))));
    }
  }
  write_file_atomic(path, buf);
}

FeatureMatrix read_feature_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature dump '" + path.string() + "'");
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 16 || buf.compare(0, 4, "FEA1") != 0) {
    throw Error("'" + path.string() + "' is not a FEA1 feature dump");
  }
  const std::uint32_t frames = load_u32(buf, 4), dim = load_u32(buf, 8);
  const std::uint32_t hop_us = load_u32(buf, 12);
  if (buf.size() != 16 + 4ull * frames * dim) {
    throw Error("'" + path.string() + "' has the wrong payload size");
  }
  FeatureMatrix f;
  f.hop_sec = hop_us * 1e-6;
  f.data.resize(frames, dim);
  std::size_t pos = 16;
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t d = 0; d < dim; ++d, pos += 4) {
      f.data(t, d) = std::bit_cast<float>(load_u32(buf, pos));
    }
  }
  return f;
}

}  // namespace diarkit
