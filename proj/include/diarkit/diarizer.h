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
#include <span>
#include <string>
#include <vector>

#include "diarkit/features.h"
#include "diarkit/gmm.h"
#include "diarkit/segments.h"

namespace diarkit {

struct DiarizerConfig {
  int n_speakers = 4;
  int initial_states = 12;
  double min_duration_sec = 0.5;
  int components_per_segment = 2;
  bool no_sad_mode = false;
  double self_loop_prob = 0.9;
  int max_outer_iters = 0;  // 0 = initial_states
  int segmental_em_iters = 10;
  int merge_em_iters = 5;
  int refit_em_iters = 20;
  std::uint64_t seed = 7;

  // Throws on invalid values; warns when initial_states is outside
  // [3N, 6N].
  void validate() const;
  int sub_states(double hop_sec) const;
};

// Minimum-duration topology: each of `states` states is a chain of
// `sub_states` sub-states visited in order; the last one self-loops with
// `self_loop` and otherwise enters the first sub-state of another state
// uniformly. Decoding starts uniformly in any state's first sub-state and
// may end anywhere.
struct HmmTopology {
  int states = 1;
  int sub_states = 1;
  double self_loop = 0.9;

  double log_self() const;
  double log_switch() const;
  // Outgoing transition mass of the given sub-state (1 for a valid model).
  double outgoing_mass(int sub_state) const;
};

struct HmmModel {
  HmmTopology topology;
  std::vector<Gmm> states;
  std::vector<int> state_ids;  // stable identity across merges
  int non_speech_id = -1;      // state id modelling non-speech, or -1

  bool is_non_speech(std::size_t k) const { return state_ids[k] == non_speech_id; }
  void validate() const;
};

struct ViterbiPath {
  std::vector<int> labels;  // parent state per frame
  double log_prob = 0.0;
};

// Best sub-state path given frames x states emission log-likelihoods.
// Backpointer ties go to the lower state index (and to the chain over the
// self-loop); the final argmax tie goes to the lower state.
ViterbiPath viterbi(const HmmTopology& topo, const RowMatrix& log_emissions);

RowMatrix state_log_emissions(const HmmModel& model, const RowMatrix& x);

struct SegmentalEmResult {
  HmmModel model;
  std::vector<int> path;              // alignment the returned GMMs were fit on
  std::vector<double> path_log_probs;  // Viterbi score per iteration
  int iterations = 0;
  std::vector<int> dropped_ids;
};

// Alternates Viterbi alignment and warm-started per-state EM refits until the
// alignment repeats or `max_iters` is reached. States left without frames
// are dropped.
SegmentalEmResult segmental_em(HmmModel model, const RowMatrix& x, int max_iters,
                               const EmOptions& refit);

struct FrameRange {
  Eigen::Index begin = 0;
  Eigen::Index end = 0;
  Eigen::Index size() const { return end - begin; }
  bool operator==(const FrameRange&) const = default;
};

// Uniform partition into `os` contiguous ranges whose sizes differ by at most
// one; earlier ranges take the remainder. Each range must hold at least
// `min_frames` frames.
std::vector<FrameRange> init_segmentation(Eigen::Index n_frames, int os,
                                          Eigen::Index min_frames = 1);

struct MergeStep {
  int outer_iteration = 0;
  int kept_id = 0;
  int absorbed_id = 0;
  double gain = 0.0;
  int states_after = 0;
};

struct DiarizationResult {
  Hypothesis hypothesis;
  std::vector<std::string> frame_labels;  // per input frame; "NS" for non-speech
  int final_speaker_states = 0;
  int target_states = 0;
  std::string stop_reason;  // target_reached | no_positive_gain | max_iterations
  // (outer iteration, Viterbi path log-probability) per segmental-EM step
  std::vector<std::pair<int, double>> log_likelihoods;
  std::vector<MergeStep> merges;
  std::vector<std::string> warnings;
};

// Informed-HMM diarization of features X. `frame_index` maps each row of X
// to its original frame number for timing (identity when empty). In NO-SAD
// mode X.speech_mask must be set; its non-speech frames seed one extra
// state that is never merged and is emitted as non-speech.
DiarizationResult diarize(const FeatureMatrix& x, const DiarizerConfig& cfg,
                          std::span<const Eigen::Index> frame_index = {});

// As diarize(), but with explicit initial speaker segments (row ranges
// of X, in the given order).
DiarizationResult diarize_from(const FeatureMatrix& x, const DiarizerConfig& cfg,
                               const std::vector<FrameRange>& initial,
                               std::span<const Eigen::Index> frame_index = {});

// Converts per-row labels into time segments; rows are contiguous in time
// when their original frame numbers are consecutive.
Hypothesis frames_to_segments(const std::vector<std::string>& labels,
                              std::span<const Eigen::Index> frame_index, double hop_sec,
                              double window_sec);

}  // namespace diarkit
