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

#include "diarkit/pipeline.h"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "diarkit/common.h"

namespace diarkit {
namespace {

std::vector<FeatureMatrix> channel_mfccs(const MultiStreamAudio& audio, const PipelineConfig& cfg) {
  audio.validate();
  if (audio.sample_rate != cfg.sample_rate)
    throw Error("audio rate " + std::to_string(audio.sample_rate) + " Hz does not match configured " +
                std::to_string(cfg.sample_rate) + " Hz");
  std::vector<FeatureMatrix> out;
  for (const auto& ch : audio.channels) out.push_back(mfcc(ch, audio.sample_rate, cfg.mfcc));
  return out;
}

FeatureMatrix concat_cmvn(const std::vector<FeatureMatrix>& raw, std::span<const std::uint8_t> mask) {
  std::vector<FeatureMatrix> normed;
  for (std::size_t c = 0; c < raw.size(); ++c) {
    auto r = cmvn(raw[c], mask);
    for (int d : r.zeroed_dims)
      warn("channel " + std::to_string(c) + " dim " + std::to_string(d) + " has zero variance");
    normed.push_back(std::move(r.features));
  }
  return concat_streams(normed);
}

}  // namespace

FeatureMatrix concatenated_features(const MultiStreamAudio& audio, const PipelineConfig& cfg,
                                    std::span<const std::uint8_t> cmvn_mask) {
  return concat_cmvn(channel_mfccs(audio, cfg), cmvn_mask);
}

std::vector<std::uint8_t> energy_speech_mask(const FeatureMatrix& m) {
  if (m.frames() < 2) throw Error("too few frames for an energy split");
  const Eigen::VectorXd c0 = m.data.col(0);
  double lo = c0.minCoeff(), hi = c0.maxCoeff();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m.frames()), 0);
  if (!(hi > lo)) throw Error("flat energy trajectory; cannot split speech from non-speech");
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s0 = 0, s1 = 0;
    Eigen::Index n0 = 0, n1 = 0;
    for (Eigen::Index t = 0; t < c0.size(); ++t) {
      if (c0(t) > mid) {
        s1 += c0(t);
        ++n1;
      } else {
        s0 += c0(t);
        ++n0;
      }
    }
    const double nlo = n0 ? s0 / n0 : lo, nhi = n1 ? s1 / n1 : hi;
    if (nlo == lo && nhi == hi) break;
    lo = nlo;
    hi = nhi;
  }
  const double mid = 0.5 * (lo + hi);
  for (Eigen::Index t = 0; t < c0.size(); ++t) mask[static_cast<std::size_t>(t)] = c0(t) > mid;
  return mask;
}

PipelineResult run_diarization(const MultiStreamAudio& audio, const std::vector<Segment>* sad,
                               const PipelineConfig& cfg, const dae::Network* pretrained) {
  cfg.validate();
  const bool no_sad = cfg.diarizer.no_sad_mode;
  if (!no_sad && !sad) throw ValidationError("oracle-SAD mode needs SAD segments");
  PipelineResult res;
  res.duration_sec = audio.duration_sec();
  const auto raw = channel_mfccs(audio, cfg);
  const FeatureMatrix& ref = raw.front();

  std::vector<std::uint8_t> mask;
  if (no_sad) {
    mask = energy_speech_mask(ref);
  } else {
    mask = sad_mask(ref.frames(), ref.hop_sec, ref.window_sec, *sad);
  }
  // NO-SAD normalizes over the whole session; it has no trusted speech mask.
  FeatureMatrix concat = concat_cmvn(raw, no_sad ? std::span<const std::uint8_t>{} : std::span<const std::uint8_t>(mask));
  res.frames_total = concat.frames();

  FeatureMatrix input;
  if (cfg.features == FeatureKind::kMfcc91) {
    input = std::move(concat);
  } else {
    const FeatureMatrix spliced = splice(concat, cfg.splice_left, cfg.splice_right);
    SadSelection train = no_sad ? SadSelection{spliced, {}}
                                : apply_sad(spliced, *sad, SadMode::kOracle);
    if (pretrained) {
      if (pretrained->layer_dims().front() != spliced.dim())
        throw ValidationError("DAE model expects " + std::to_string(pretrained->layer_dims().front()) +
                              "-dim input but features have " + std::to_string(spliced.dim()));
      res.network = *pretrained;
    } else {
      res.network = dae::pretrain_stack(train.features, cfg.dae, cfg.seed, &res.dae_report);
      res.dae_trained = true;
    }
    input = dae::bottleneck(res.network, spliced);
  }
  input.speech_mask = mask;

  DiarizerConfig dcfg = cfg.diarizer;
  dcfg.seed = cfg.seed;
  if (no_sad) {
    res.frames_used = input.frames();
    res.diarization = diarize(input, dcfg);
  } else {
    SadSelection sel = apply_sad(input, *sad, SadMode::kOracle);
    res.frames_used = sel.features.frames();
    res.diarization = diarize(sel.features, dcfg, sel.frame_index);
  }
  res.feature_dim = input.dim();
  return res;
}

std::string metadata_json(const PipelineResult& r, const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& d = r.diarization;
  j["final_states"] = d.final_speaker_states;
  j["target_states"] = d.target_states;
  j["stop_reason"] = d.stop_reason;
  auto& ll = j["log_likelihoods"] = nlohmann::json::array();
  for (const auto& [outer, v] : d.log_likelihoods) ll.push_back({{"outer", outer}, {"path_log_prob", v}});
  auto& merges = j["merges"] = nlohmann::json::array();
  for (const auto& m : d.merges)
    merges.push_back({{"outer", m.outer_iteration},
                      {"kept", m.kept_id},
                      {"absorbed", m.absorbed_id},
                      {"gain", m.gain},
                      {"states_after", m.states_after}});
  j["warnings"] = d.warnings;
  j["frames_total"] = r.frames_total;
  j["frames_used"] = r.frames_used;
  j["feature_dim"] = r.feature_dim;
  if (r.dae_trained) {
    j["dae"] = {{"initial_mse", r.dae_report.initial_mse},
                {"final_mse", r.dae_report.final_mse},
                {"epoch_loss", r.dae_report.epoch_loss}};
  }
  nlohmann::ordered_json c;
  for (const auto& [k, v] : cfg.entries()) c[k] = v;
  j["config"] = c;
  return j.dump();
}

FeatureStage parse_feature_stage(const std::string& name) {
  if (name == "mfcc") return FeatureStage::kMfcc;
  if (name == "cmvn") return FeatureStage::kCmvn;
  if (name == "concat") return FeatureStage::kConcat;
  if (name == "splice") return FeatureStage::kSplice;
  if (name == "bnf") return FeatureStage::kBnf;
  throw ValidationError("unknown feature stage '" + name + "' (mfcc|cmvn|concat|splice|bnf)");
}

FeatureMatrix feature_stage(const MultiStreamAudio& audio, const std::vector<Segment>* sad,
                            const PipelineConfig& cfg, FeatureStage stage) {
  const auto raw = channel_mfccs(audio, cfg);
  if (stage == FeatureStage::kMfcc) return raw.front();
  std::vector<std::uint8_t> mask;
  if (sad) mask = sad_mask(raw.front().frames(), raw.front().hop_sec, raw.front().window_sec, *sad);
  if (stage == FeatureStage::kCmvn) return cmvn(raw.front(), mask).features;
  FeatureMatrix concat = concat_cmvn(raw, mask);
  if (stage == FeatureStage::kConcat) return concat;
  FeatureMatrix spliced = splice(concat, cfg.splice_left, cfg.splice_right);
  if (stage == FeatureStage::kSplice) return spliced;
  const FeatureMatrix train = sad ? apply_sad(spliced, *sad, SadMode::kOracle).features : spliced;
  return dae::bottleneck(dae::pretrain_stack(train, cfg.dae, cfg.seed), spliced);
}

}  // namespace diarkit
