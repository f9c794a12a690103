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

#include <optional>
#include <string>
#include <vector>

#include "diarkit/audio_io.h"
#include "diarkit/config.h"
#include "diarkit/dae.h"
#include "diarkit/diarizer.h"

namespace diarkit {

// Per-channel MFCC, CMVN (statistics over frames where `cmvn_mask` is set,
// or all frames) and concatenation.
FeatureMatrix concatenated_features(const MultiStreamAudio& audio, const PipelineConfig& cfg,
                                    std::span<const std::uint8_t> cmvn_mask = {});

// Speech flag per frame from a two-cluster split of the c0 trajectory.
std::vector<std::uint8_t> energy_speech_mask(const FeatureMatrix& mfcc_ch0);

struct PipelineResult {
  DiarizationResult diarization;
  bool dae_trained = false;
  dae::TrainReport dae_report;
  dae::Network network;
  Eigen::Index feature_dim = 0;
  Eigen::Index frames_total = 0;
  Eigen::Index frames_used = 0;
  double duration_sec = 0.0;
};

// Oracle-SAD mode needs `sad`; NO-SAD mode ignores it and derives its
// non-speech mask from frame energy. `pretrained` skips DAE training.
PipelineResult run_diarization(const MultiStreamAudio& audio, const std::vector<Segment>* sad,
                               const PipelineConfig& cfg,
                               const dae::Network* pretrained = nullptr);

// One-line JSON record: final state count, stop reason, per-iteration
// log-likelihoods, merge trace, warnings and the effective config.
std::string metadata_json(const PipelineResult& result, const PipelineConfig& cfg);

enum class FeatureStage { kMfcc, kCmvn, kConcat, kSplice, kBnf };
FeatureStage parse_feature_stage(const std::string& name);

// Intermediate features for debugging; kMfcc and kCmvn return channel 0.
FeatureMatrix feature_stage(const MultiStreamAudio& audio, const std::vector<Segment>* sad,
                            const PipelineConfig& cfg, FeatureStage stage);

}  // namespace diarkit
