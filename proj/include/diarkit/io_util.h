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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace diarkit {

// Fixed-point decimal rendering with `digits` fractional digits; "-0.000"
// is normalized to "0.000".
std::string format_fixed(double v, int digits);

// `%.<digits>g` rendering.
std::string format_general(double v, int digits);

// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// True for NIST RTTM record type names other than SPEAKER.
bool is_rttm_record_type(std::string_view token);

}  // namespace diarkit
