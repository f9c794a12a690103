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

#include "diarkit/audio_io.h"
#include "diarkit/segments.h"

namespace diarkit {

// Harmonic voice: a glottal pulse train at `f0_hz`, a one-pole spectral tilt
// (0 = flat, towards 1 = steeper), and a cascade of formant resonators.
struct VoiceSpec {
  double f0_hz = 120.0;
  double tilt = 0.85;
  std::vector<double> formants_hz;
  double level = 1.0;
};

struct ScriptEvent {
  int speaker = 0;
  double start_sec = 0.0;
  double duration_sec = 0.0;
};

struct SessionScript {
  std::vector<VoiceSpec> speakers;
  std::vector<ScriptEvent> events;  // ordered by start, non-overlapping
  double total_duration_sec = 0.0;

  void validate() const;
};

struct ChannelModel {
  std::vector<double> delays_ms;
  std::vector<double> gains;
  double noise_snr_db = 15.0;
  std::uint64_t seed = 7;
  int sample_rate = 8000;

  std::size_t channel_count() const { return delays_ms.size(); }
  void validate() const;
};

// Delays spread evenly over [0, max_delay_ms], gains evenly over [1, min_gain].
ChannelModel default_channel_model(std::size_t channels, double max_delay_ms = 5.0,
                                   double min_gain = 0.5);

struct SynthesizedSession {
  MultiStreamAudio audio;
  Hypothesis reference;  // labels "spk<i>"
};

// Renders the script into C delayed, scaled copies of one noisy mix.
// Deterministic for a given (script, model).
SynthesizedSession synth_session(const SessionScript& script, const ChannelModel& model);

// Random turn-taking script where each speaker is picked with probability
// proportional to `shares` (uniform when empty). Voices come from a fixed
// palette whose fundamentals are 35 Hz apart; at most 8 speakers.
SessionScript make_demo_script(int n_speakers, double total_sec, std::span<const double> shares,
                               std::uint64_t seed, double min_turn_sec = 1.0,
                               double max_turn_sec = 4.0);

SessionScript read_script(const std::filesystem::path& path);
void write_script(const std::filesystem::path& path, const SessionScript& script);

Hypothesis script_reference(const SessionScript& script);

}  // namespace diarkit
