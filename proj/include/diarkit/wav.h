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
#include <span>
#include <vector>

namespace diarkit {

// Decoded RIFF/WAVE contents, one vector per channel, samples in [-1, 1].
struct WavData {
  std::vector<std::vector<double>> channels;
  double sample_rate = 0.0;
};

// Reads 16-bit integer or 32-bit float PCM (plain or WAVE_FORMAT_EXTENSIBLE).
// Interleaved multi-channel files are split into channels.
WavData read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate);

}  // namespace diarkit
