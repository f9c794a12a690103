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
#include <vector>

#include "diarkit/resample.h"

namespace diarkit {

// C synchronized channels at a common rate. Channel order is the order in
// which the streams were supplied.
struct MultiStreamAudio {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;

  std::size_t channel_count() const { return channels.size(); }
  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
  double duration_sec() const {
    return sample_rate > 0 ? static_cast<double>(length()) / sample_rate : 0.0;
  }
  // Throws unless rate > 0, C >= 1 and all channels share one length.
  void validate() const;
};

struct LoadOptions {
  int target_rate = 8000;
  // Streams may differ in duration by at most this much before being
  // truncated to the shortest one.
  double max_mismatch_sec = 0.010;
  ResamplerConfig resampler;
};

// Loads one mono WAV per channel, or a single interleaved multi-channel WAV,
// resampling every channel to `target_rate`.
MultiStreamAudio load_session(const std::vector<std::filesystem::path>& paths,
                              const LoadOptions& opts = {});

}  // namespace diarkit
