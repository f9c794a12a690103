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
#include <span>
#include <vector>

#include "diarkit/common.h"
#include "diarkit/segments.h"

namespace diarkit {

// Frames x dims feature matrix. Frame t covers samples
// [t*hop, t*hop + window); its nominal time is the window center.
struct FeatureMatrix {
  RowMatrix data;
  double hop_sec = 0.010;
  double window_sec = 0.025;
  // Optional per-frame speech flag (1 = speech). Empty when absent.
  std::vector<std::uint8_t> speech_mask;

  Eigen::Index frames() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
  double frame_center(Eigen::Index t) const {
    return static_cast<double>(t) * hop_sec + 0.5 * window_sec;
  }
  bool all_finite() const { return data.allFinite(); }
};

struct MfccConfig {
  double preemphasis = 0.97;
  int window = 200;  // samples
  int hop = 80;      // samples
  int fft_size = 256;
  int num_filters = 26;
  double low_hz = 0.0;
  double high_hz = 0.0;  // 0 = Nyquist
  double log_floor = 1e-10;
  int num_ceps = 13;  // c0..c12
};

// Pre-emphasis is applied to the whole signal (y[0] = x[0]), then Hamming-
// windowed frames go through a power spectrum, triangular mel filters
// (HTK mel scale, weights evaluated at exact bin frequencies), log with
// floor, and an orthonormal DCT-II.
FeatureMatrix mfcc(std::span<const double> signal, int sample_rate,
                   const MfccConfig& cfg = {});

struct CmvnResult {
  FeatureMatrix features;
  std::vector<int> zeroed_dims;  // dims whose masked variance fell below 1e-12
};

// Per-dim z-scoring with statistics over frames where mask != 0 (all frames
// when the mask is empty); all frames are transformed.
CmvnResult cmvn(const FeatureMatrix& f, std::span<const std::uint8_t> mask = {});

// Row t = [ch0(t) | ch1(t) | ...] in input order.
FeatureMatrix concat_streams(std::span<const FeatureMatrix> per_channel);

// Row t = [f(t-left) | ... | f(t) | ... | f(t+right)], replicating edge rows.
FeatureMatrix splice(const FeatureMatrix& f, int left = 5, int right = 5);

enum class SadMode { kOracle, kNoSad };

struct SadSelection {
  FeatureMatrix features;
  std::vector<Eigen::Index> frame_index;  // selected row -> original frame
};

// 1 for frames whose center lies in some [start, end) segment.
std::vector<std::uint8_t> sad_mask(Eigen::Index frames, double hop_sec, double window_sec,
                                   const std::vector<Segment>& sad);

// Oracle mode keeps only speech frames; NO-SAD mode keeps every frame and
// attaches the mask. Oracle mode with no speech frames is an error.
SadSelection apply_sad(const FeatureMatrix& f, const std::vector<Segment>& sad, SadMode mode);

// Flat dump: "FEA1", u32 frames, u32 dim, u32 hop in microseconds, then
// little-endian float32 rows.
void write_feature_dump(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix read_feature_dump(const std::filesystem::path& path);

}  // namespace diarkit
