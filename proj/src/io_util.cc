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

#include "diarkit/io_util.h"

#include <array>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "diarkit/common.h"

namespace diarkit {

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string format_general(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write '" + tmp.string() + "'");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "': " + ec.message());
}

bool is_rttm_record_type(std::string_view token) {
  static constexpr std::array<std::string_view, 9> kTypes = {
      "SEGMENT", "NOSCORE", "NO_RT_METADATA", "LEXEME", "NON-LEX",
      "NON-SPEECH", "FILLER", "SPKR-INFO", "IP"};
  for (auto t : kTypes) {
    if (token == t) return true;
  }
  return false;
}

}  // namespace diarkit
