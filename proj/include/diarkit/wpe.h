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

#include <array>
#include <span>
#include <vector>

#include "diarkit/segments.h"

namespace diarkit {

// sym6 decomposition low-pass filter.
extern const std::array<double, 12> kSym6Lowpass;
// g[n] = (-1)^n h[11 - n].
std::array<double, 12> sym6_highpass();

// Full wavelet-packet tree, leaves only, in natural frequency order.
struct WptTree {
  int depth = 6;
  std::size_t input_length = 0;  // before padding
  std::vector<std::vector<double>> leaves;

  double energy() const;
};

// Periodized orthogonal packet transform. Input is zero-padded to a
// multiple of 2^depth.
WptTree wpt(std::span<const double> signal, int depth = 6);
std::vector<double> inverse_wpt(const WptTree& tree);

double band_energy(const WptTree& tree, double f_lo = 50.0, double f_hi = 2000.0,
                   double rate = 8000.0);

// Band energy of each segment of `audio` (the reference channel).
// Segments shorter than 2^depth samples are zero-padded.
std::vector<double> segment_energy(std::span<const double> audio, double rate,
                                   const std::vector<Segment>& segments, double f_lo = 50.0,
                                   double f_hi = 2000.0, int depth = 6);

}  // namespace diarkit
