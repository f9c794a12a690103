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
#include <map>
#include <string>

#include "diarkit/segments.h"

namespace diarkit {

struct DerBreakdown {
  double fa_sec = 0.0;
  double miss_sec = 0.0;
  double err_sec = 0.0;
  double total_sec = 0.0;  // scored reference speech
  double der = 0.0;
  std::map<std::string, std::string> mapping;  // hypothesis label -> reference label
};

// Diarization error rate with an optimal one-to-one label mapping. Times
// within +-collar of any reference boundary are not scored. "NS" segments
// count as non-speech. Overlapping segments within either input are
// rejected.
DerBreakdown score_der(const Hypothesis& reference, const Hypothesis& hypothesis,
                       double collar_sec = 0.0);

std::string der_text(const DerBreakdown& b);
std::string der_json(const DerBreakdown& b);

Hypothesis rttm_read(const std::filesystem::path& path);
std::string rttm_format(const Hypothesis& hyp, const std::string& file_id);
void rttm_write(const Hypothesis& hyp, const std::filesystem::path& path,
                const std::string& file_id);

}  // namespace diarkit
