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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "diarkit/dae.h"
#include "diarkit/diarizer.h"
#include "diarkit/features.h"

namespace diarkit {

enum class FeatureKind { kBnf, kMfcc91 };

struct PipelineConfig {
  int sample_rate = 8000;
  MfccConfig mfcc;
  int splice_left = 5;
  int splice_right = 5;
  FeatureKind features = FeatureKind::kBnf;
  dae::TrainConfig dae;
  DiarizerConfig diarizer;
  std::uint64_t seed = 7;

  void validate() const;
  // Effective settings as ordered key/value pairs, using the same keys
  // accepted by set().
  std::vector<std::pair<std::string, std::string>> entries() const;
  // Throws ValidationError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
};

// `key = value` lines; '#' starts a comment. Later keys win.
std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& source);
void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path);

}  // namespace diarkit
