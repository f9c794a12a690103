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
#include <istream>
#include <string>
#include <vector>

namespace diarkit {

// A labeled time interval in seconds. SAD segments carry an empty label.
struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::string label;

  double duration() const { return end - start; }
  bool operator==(const Segment&) const = default;
};

// Ordered, non-overlapping speaker segments (labels "spk0".."spkK-1").
using Hypothesis = std::vector<Segment>;

// Label given to non-speech segments in NO-SAD diarization output.
inline constexpr const char* kNonSpeechLabel = "NS";

// Parses `start end [label]` lines ('#' starts a comment) or RTTM SPEAKER
// records. Output is sorted by start. Unlabeled overlapping segments are
// merged; labeled overlapping segments are an error. `source` names the
// input in error messages.
std::vector<Segment> parse_segments(std::istream& in, const std::string& source);
std::vector<Segment> read_segments(const std::filesystem::path& path);

// Writes `start end [label]` lines with millisecond precision.
void write_segments(const std::filesystem::path& path, const std::vector<Segment>& segs);

// Sorts and merges overlapping or touching unlabeled intervals.
std::vector<Segment> merge_intervals(std::vector<Segment> segs);

double total_duration(const std::vector<Segment>& segs);

}  // namespace diarkit
