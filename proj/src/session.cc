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

#include "diarkit/audio_io.h"

#include <algorithm>
#include <limits>

#include "diarkit/common.h"
#include "diarkit/io_util.h"
#include "diarkit/wav.h"

namespace diarkit {

void MultiStreamAudio::validate() const {
  if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
  if (channels.empty()) throw ValidationError("audio needs at least one channel");
  for (const auto& ch : channels) {
    if (ch.size() != channels.front().size()) {
      throw ValidationError("audio channels differ in length");
    }
  }
}

MultiStreamAudio load_session(const std::vector<std::filesystem::path>& paths,
                              const LoadOptions& opts) {
  if (paths.empty()) throw ValidationError("no audio files given");
  if (opts.target_rate <= 0) throw ValidationError("target rate must be positive");

  struct Stream {
    std::vector<double> samples;
    double rate;
    std::string name;
  };
  std::vector<Stream> streams;
  for (const auto& p : paths) {
    WavData w = read_wav(p);
    if (paths.size() > 1 && w.channels.size() != 1) {
      throw Error("'" + p.string() + "' is not mono (" + std::to_string(w.channels.size()) +
                  " channels)");
    }
    for (std::size_t c = 0; c < w.channels.size(); ++c) {
      if (w.channels[c].empty()) throw Error("'" + p.string() + "' contains no samples");
      std::string name = p.string();
      if (w.channels.size() > 1) name += " channel " + std::to_string(c);
      streams.push_back({std::move(w.channels[c]), w.sample_rate, std::move(name)});
    }
  }

  double shortest = std::numeric_limits<double>::infinity();
  std::string shortest_name;
  for (const auto& s : streams) {
    if (s.samples.size() / s.rate < shortest) {
      shortest = s.samples.size() / s.rate;
      shortest_name = s.name;
    }
  }
  for (const auto& s : streams) {
    const double dur = s.samples.size() / s.rate;
    if (dur - shortest > opts.max_mismatch_sec + 1e-12) {
      throw Error("'" + s.name + "' duration " + format_fixed(dur, 3) + " s differs from '" +
                  shortest_name + "' (" + format_fixed(shortest, 3) + " s) by more than one hop");
    }
  }

  MultiStreamAudio out;
  out.sample_rate = opts.target_rate;
  for (auto& s : streams) {
    const int rate = static_cast<int>(s.rate);
    out.channels.push_back(resample(s.samples, rate, opts.target_rate, opts.resampler));
  }
  std::size_t len = out.channels.front().size();
  for (const auto& ch : out.channels) len = std::min(len, ch.size());
  for (auto& ch : out.channels) ch.resize(len);
  return out;
}

}  // namespace diarkit
