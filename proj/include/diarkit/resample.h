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

#include <span>
#include <vector>

namespace diarkit {

struct ResamplerConfig {
  // Kernel half-length in samples of the lower of the two rates; 32 gives a
  // 64-tap kernel at that rate.
  int half_taps = 32;
  double kaiser_beta = 8.0;
  // Passband edge as a fraction of the lower Nyquist frequency.
  double cutoff = 0.9;
};

// Windowed-sinc (Kaiser) rational resampler. Rates must be integral Hz.
// Equal rates return the input unchanged. Output length is
// floor(in_len * out_rate / in_rate).
std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate,
                             const ResamplerConfig& cfg = {});

}  // namespace diarkit
