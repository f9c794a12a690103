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

#include "diarkit/diarizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diarkit/common.h"

namespace diarkit {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

RowMatrix gather_rows(const RowMatrix& x, const std::vector<Eigen::Index>& rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

std::uint64_t range_seed(std::uint64_t seed, Eigen::Index begin) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(begin) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::vector<Eigen::Index>> rows_by_state(const std::vector<int>& path, std::size_t k) {
  std::vector<std::vector<Eigen::Index>> rows(k);
  for (std::size_t t = 0; t < path.size(); ++t) rows[static_cast<std::size_t>(path[t])].push_back(static_cast<Eigen::Index>(t));
  return rows;
}

}  // namespace

void DiarizerConfig::validate() const {
  if (n_speakers < 1) throw ValidationError("speakers must be at least 1");
  if (initial_states < n_speakers)
    throw ValidationError("initial states (" + std::to_string(initial_states) +
                          ") must be at least the number of speakers (" +
                          std::to_string(n_speakers) + ")");
  if (!(min_duration_sec > 0.0)) throw ValidationError("minimum duration must be positive");
  if (components_per_segment < 1) throw ValidationError("components per segment must be at least 1");
  if (!(self_loop_prob > 0.0 && self_loop_prob < 1.0))
    throw ValidationError("self-loop probability must be in (0, 1)");
  if (max_outer_iters < 0) throw ValidationError("max outer iterations must be >= 0");
  if (segmental_em_iters < 1 || merge_em_iters < 1 || refit_em_iters < 1)
    throw ValidationError("EM iteration counts must be at least 1");
  if (initial_states < 3 * n_speakers || initial_states > 6 * n_speakers)
    warn("initial states " + std::to_string(initial_states) + " outside the usual range [" +
         std::to_string(3 * n_speakers) + ", " + std::to_string(6 * n_speakers) + "]");
}

int DiarizerConfig::sub_states(double hop_sec) const {
  return std::max(1, static_cast<int>(std::lround(min_duration_sec / hop_sec)));
}

double HmmTopology::log_self() const { return states == 1 ? 0.0 : std::log(self_loop); }

double HmmTopology::log_switch() const {
  return states == 1 ? kNegInf : std::log((1.0 - self_loop) / (states - 1));
}

double HmmTopology::outgoing_mass(int sub_state) const {
  if (sub_state < sub_states - 1) return 1.0;
  return std::exp(log_self()) + (states - 1) * std::exp(log_switch());
}

void HmmModel::validate() const {
  if (topology.states != static_cast<int>(states.size()) || states.size() != state_ids.size())
    throw Error("HMM state bookkeeping is inconsistent");
  if (topology.sub_states < 1) throw Error("HMM needs at least one sub-state");
  for (const auto& g : states) g.validate();
}

ViterbiPath viterbi(const HmmTopology& topo, const RowMatrix& e) {
  const int k_n = topo.states;
  const int s_n = topo.sub_states;
  const Eigen::Index n = e.rows();
  if (e.cols() != k_n) throw Error("emission matrix has wrong number of states");
  ViterbiPath out;
  if (n == 0) return out;
  const double ls = topo.log_self();
  const double lx = topo.log_switch();

  // delta[k * s_n + i]
  std::vector<double> delta(static_cast<std::size_t>(k_n) * s_n, kNegInf), next(delta.size());
  std::vector<int> entry(static_cast<std::size_t>(n) * k_n, -1);
  std::vector<std::uint8_t> self_last(static_cast<std::size_t>(n) * k_n, 0);
  const double init = -std::log(static_cast<double>(k_n));
  for (int k = 0; k < k_n; ++k) delta[static_cast<std::size_t>(k) * s_n] = init + e(0, k);

  for (Eigen::Index t = 1; t < n; ++t) {
    const std::size_t bt = static_cast<std::size_t>(t) * k_n;
    for (int k = 0; k < k_n; ++k) {
      double* nk = &next[static_cast<std::size_t>(k) * s_n];
      const double* dk = &delta[static_cast<std::size_t>(k) * s_n];
      // entry sub-state
      double best = kNegInf;
      int arg = -1;
      for (int j = 0; j < k_n; ++j) {
        if (s_n > 1 && j == k) continue;
        const double v = delta[static_cast<std::size_t>(j) * s_n + s_n - 1] + (j == k ? ls : lx);
        if (v > best || arg < 0) {
          best = v;
          arg = j;
        }
      }
      entry[bt + k] = arg;
      if (s_n == 1) {
        self_last[bt + k] = arg == k;
        nk[0] = best + e(t, k);
        continue;
      }
      nk[0] = best + e(t, k);
      for (int i = 1; i < s_n - 1; ++i) nk[i] = dk[i - 1] + e(t, k);
      const double chain = dk[s_n - 2];
      const double loop = dk[s_n - 1] + ls;
      if (loop > chain) {
        nk[s_n - 1] = loop + e(t, k);
        self_last[bt + k] = 1;
      } else {
        nk[s_n - 1] = chain + e(t, k);
      }
    }
    delta.swap(next);
  }

  int bk = 0, bi = 0;
  double best = kNegInf;
  bool found = false;
  for (int k = 0; k < k_n; ++k)
    for (int i = 0; i < s_n; ++i) {
      const double v = delta[static_cast<std::size_t>(k) * s_n + i];
      if (!found || v > best) {
        best = v;
        bk = k;
        bi = i;
        found = true;
      }
    }
  if (!std::isfinite(best)) throw Error("Viterbi found no finite path (session shorter than the minimum duration?)");
  out.log_prob = best;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  int k = bk, i = bi;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    out.labels[static_cast<std::size_t>(t)] = k;
    if (t == 0) break;
    const std::size_t bt = static_cast<std::size_t>(t) * k_n;
    if (s_n == 1) {
      k = entry[bt + k];
    } else if (i == 0) {
      k = entry[bt + k];
      i = s_n - 1;
    } else if (i < s_n - 1) {
      --i;
    } else if (!self_last[bt + k]) {
      i = s_n - 2;
    }
  }
  return out;
}

RowMatrix state_log_emissions(const HmmModel& model, const RowMatrix& x) {
  RowMatrix e(x.rows(), static_cast<Eigen::Index>(model.states.size()));
  for (std::size_t k = 0; k < model.states.size(); ++k)
    e.col(static_cast<Eigen::Index>(k)) = model.states[k].frame_log_likelihood(x);
  return e;
}

SegmentalEmResult segmental_em(HmmModel model, const RowMatrix& x, int max_iters,
                               const EmOptions& refit) {
  SegmentalEmResult res;
  std::vector<int> prev;
  for (int it = 0; it < max_iters; ++it) {
    const ViterbiPath vp = viterbi(model.topology, state_log_emissions(model, x));
    res.path_log_probs.push_back(vp.log_prob);
    if (vp.labels == prev) break;
    auto rows = rows_by_state(vp.labels, model.states.size());
    std::vector<int> remap(model.states.size(), -1);
    HmmModel next;
    next.topology = model.topology;
    next.non_speech_id = model.non_speech_id;
    for (std::size_t k = 0; k < model.states.size(); ++k) {
      if (rows[k].empty()) {
        res.dropped_ids.push_back(model.state_ids[k]);
        continue;
      }
      remap[k] = static_cast<int>(next.states.size());
      const RowMatrix xk = gather_rows(x, rows[k]);
      next.states.push_back(em_refine(xk, model.states[k], refit).model);
      next.state_ids.push_back(model.state_ids[k]);
    }
    next.topology.states = static_cast<int>(next.states.size());
    prev.resize(vp.labels.size());
    for (std::size_t t = 0; t < vp.labels.size(); ++t) prev[t] = remap[static_cast<std::size_t>(vp.labels[t])];
    model = std::move(next);
    ++res.iterations;
  }
  res.model = std::move(model);
  res.path = std::move(prev);
  return res;
}

std::vector<FrameRange> init_segmentation(Eigen::Index n_frames, int os, Eigen::Index min_frames) {
  if (os < 1) throw ValidationError("need at least one initial segment");
  if (n_frames < static_cast<Eigen::Index>(os) * std::max<Eigen::Index>(1, min_frames))
    throw ValidationError("too few frames (" + std::to_string(n_frames) + ") for " +
                          std::to_string(os) + " initial segments of at least " +
                          std::to_string(min_frames) + " frames");
  std::vector<FrameRange> out;
  const Eigen::Index base = n_frames / os, extra = n_frames % os;
  Eigen::Index pos = 0;
  for (int i = 0; i < os; ++i) {
    const Eigen::Index len = base + (i < extra ? 1 : 0);
    out.push_back({pos, pos + len});
    pos += len;
  }
  return out;
}

Hypothesis frames_to_segments(const std::vector<std::string>& labels,
                              std::span<const Eigen::Index> frame_index, double hop_sec,
                              double window_sec) {
  if (!frame_index.empty() && frame_index.size() != labels.size())
    throw Error("frame index size does not match labels");
  auto orig = [&](std::size_t i) {
    return frame_index.empty() ? static_cast<Eigen::Index>(i) : frame_index[i];
  };
  // Frame f spans [edge(f), edge(f + 1)): hop-wide, centered on its window.
  auto edge = [&](Eigen::Index f) {
    return static_cast<double>(f) * hop_sec + 0.5 * (window_sec - hop_sec);
  };
  Hypothesis hyp;
  std::size_t i = 0;
  while (i < labels.size()) {
    std::size_t j = i;
    while (j + 1 < labels.size() && labels[j + 1] == labels[i] && orig(j + 1) == orig(j) + 1) ++j;
    if (labels[i] != kNonSpeechLabel) {
      Segment s{std::max(0.0, edge(orig(i))), edge(orig(j) + 1), labels[i]};
      if (!hyp.empty() && hyp.back().label == s.label && hyp.back().end >= s.start - 1e-9)
        hyp.back().end = s.end;
      else
        hyp.push_back(s);
    }
    i = j + 1;
  }
  std::stable_sort(hyp.begin(), hyp.end(),
                   [](const Segment& a, const Segment& b) { return a.start < b.start; });
  return hyp;
}

namespace {

DiarizationResult run(const FeatureMatrix& x, const DiarizerConfig& cfg,
                      const std::vector<std::vector<Eigen::Index>>& groups,
                      const std::vector<Eigen::Index>& ns_rows,
                      std::span<const Eigen::Index> frame_index) {
  DiarizationResult res;
  auto note = [&](const std::string& msg) {
    res.warnings.push_back(msg);
    warn(msg);
  };
  const int t_sub = cfg.sub_states(x.hop_sec);
  const Eigen::Index ms = cfg.components_per_segment;
  const Eigen::VectorXd floor = variance_floor(x.data);
  EmOptions init_opts;
  init_opts.variance_floor = floor;
  init_opts.max_iters = cfg.refit_em_iters;
  EmOptions refit = init_opts;
  EmOptions merge_opts = init_opts;
  merge_opts.max_iters = cfg.merge_em_iters;

  HmmModel model;
  model.topology.sub_states = t_sub;
  model.topology.self_loop = cfg.self_loop_prob;
  int next_id = 0;
  for (const auto& g : groups) {
    if (static_cast<Eigen::Index>(g.size()) < 2 * ms)
      throw ValidationError("initial segment has " + std::to_string(g.size()) +
                            " frames; need at least " + std::to_string(2 * ms));
    if (static_cast<Eigen::Index>(g.size()) < t_sub)
      note("initial segment shorter than the minimum duration");
    model.states.push_back(em_fit(gather_rows(x.data, g), ms, range_seed(cfg.seed, g.front()), init_opts).model);
    model.state_ids.push_back(next_id++);
  }
  if (cfg.no_sad_mode) {
    if (static_cast<Eigen::Index>(ns_rows.size()) < 2 * ms)
      throw ValidationError("too few non-speech frames to initialize the non-speech state");
    model.non_speech_id = next_id++;
    model.states.push_back(em_fit(gather_rows(x.data, ns_rows), ms, range_seed(cfg.seed, ns_rows.front()), init_opts).model);
    model.state_ids.push_back(model.non_speech_id);
  }
  model.topology.states = static_cast<int>(model.states.size());

  auto speaker_count = [](const HmmModel& m) {
    int c = 0;
    for (std::size_t k = 0; k < m.states.size(); ++k) c += m.is_non_speech(k) ? 0 : 1;
    return c;
  };
  const int max_outer = cfg.max_outer_iters > 0 ? cfg.max_outer_iters : cfg.initial_states;
  res.target_states = cfg.n_speakers;
  for (int outer = 0;; ++outer) {
    SegmentalEmResult se = segmental_em(std::move(model), x.data, cfg.segmental_em_iters, refit);
    for (double lp : se.path_log_probs) res.log_likelihoods.emplace_back(outer, lp);
    for (int id : se.dropped_ids) {
      if (id == se.model.non_speech_id) {
        note("non-speech state lost all frames and was dropped");
        se.model.non_speech_id = -1;
      } else {
        note("state " + std::to_string(id) + " lost all frames and was dropped");
      }
    }
    model = std::move(se.model);
    if (speaker_count(model) <= cfg.n_speakers) {
      res.stop_reason = "target_reached";
      break;
    }
    if (outer + 1 >= max_outer) {
      res.stop_reason = "max_iterations";
      break;
    }
    const auto rows = rows_by_state(se.path, model.states.size());
    double best_gain = kNegInf;
    std::size_t bi = 0, bj = 0;
    Gmm best_merged;
    bool any = false;
    std::vector<RowMatrix> xs(model.states.size());
    for (std::size_t k = 0; k < model.states.size(); ++k) xs[k] = gather_rows(x.data, rows[k]);
    for (std::size_t i = 0; i < model.states.size(); ++i) {
      if (model.is_non_speech(i)) continue;
      for (std::size_t j = i + 1; j < model.states.size(); ++j) {
        if (model.is_non_speech(j)) continue;
        const Eigen::Index need = 2 * (model.states[i].components() + model.states[j].components());
        if (xs[i].rows() + xs[j].rows() < need) continue;
        MergeResult mr = merge_gain(model.states[i], xs[i], model.states[j], xs[j], merge_opts);
        if (!any || mr.gain > best_gain) {
          best_gain = mr.gain;
          bi = i;
          bj = j;
          best_merged = std::move(mr.merged);
          any = true;
        }
      }
    }
    if (!any || !(best_gain > 0.0)) {
      res.stop_reason = "no_positive_gain";
      break;
    }
    MergeStep step{outer, model.state_ids[bi], model.state_ids[bj], best_gain, 0};
    model.states[bi] = std::move(best_merged);
    model.states.erase(model.states.begin() + static_cast<std::ptrdiff_t>(bj));
    model.state_ids.erase(model.state_ids.begin() + static_cast<std::ptrdiff_t>(bj));
    model.topology.states = static_cast<int>(model.states.size());
    step.states_after = speaker_count(model);
    res.merges.push_back(step);
  }

  const ViterbiPath final_path = viterbi(model.topology, state_log_emissions(model, x.data));
  std::vector<std::string> names(model.states.size());
  int spk = 0;
  for (std::size_t k = 0; k < model.states.size(); ++k)
    names[k] = model.is_non_speech(k) ? std::string(kNonSpeechLabel) : "spk" + std::to_string(spk++);
  res.final_speaker_states = spk;
  res.frame_labels.reserve(final_path.labels.size());
  for (int l : final_path.labels) res.frame_labels.push_back(names[static_cast<std::size_t>(l)]);
  res.hypothesis = frames_to_segments(res.frame_labels, frame_index, x.hop_sec, x.window_sec);
  if (res.stop_reason != "target_reached") {
    std::ostringstream os;
    os << "stopped with " << spk << " speaker states (target " << cfg.n_speakers
       << "): " << res.stop_reason;
    note(os.str());
  }
  return res;
}

void check_input(const FeatureMatrix& x, const DiarizerConfig& cfg,
                 std::span<const Eigen::Index> frame_index) {
  cfg.validate();
  if (x.frames() == 0 || x.dim() == 0) throw ValidationError("no feature frames to diarize");
  if (!x.all_finite()) throw ValidationError("features contain non-finite values");
  if (!frame_index.empty() && static_cast<Eigen::Index>(frame_index.size()) != x.frames())
    throw ValidationError("frame index size does not match feature frames");
  if (cfg.no_sad_mode && static_cast<Eigen::Index>(x.speech_mask.size()) != x.frames())
    throw ValidationError("NO-SAD mode needs a speech mask on the features");
}

std::vector<Eigen::Index> mask_rows(const FeatureMatrix& x, bool speech) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < x.frames(); ++t)
    if ((x.speech_mask[static_cast<std::size_t>(t)] != 0) == speech) rows.push_back(t);
  return rows;
}

}  // namespace

DiarizationResult diarize(const FeatureMatrix& x, const DiarizerConfig& cfg,
                          std::span<const Eigen::Index> frame_index) {
  check_input(x, cfg, frame_index);
  const Eigen::Index min_frames = std::max<Eigen::Index>(2 * cfg.components_per_segment, 1);
  std::vector<Eigen::Index> speech;
  std::vector<Eigen::Index> ns;
  if (cfg.no_sad_mode) {
    speech = mask_rows(x, true);
    ns = mask_rows(x, false);
  } else {
    speech.resize(static_cast<std::size_t>(x.frames()));
    for (Eigen::Index t = 0; t < x.frames(); ++t) speech[static_cast<std::size_t>(t)] = t;
  }
  const auto ranges = init_segmentation(static_cast<Eigen::Index>(speech.size()), cfg.initial_states, min_frames);
  std::vector<std::vector<Eigen::Index>> groups;
  for (const auto& r : ranges)
    groups.emplace_back(speech.begin() + r.begin, speech.begin() + r.end);
  return run(x, cfg, groups, ns, frame_index);
}

DiarizationResult diarize_from(const FeatureMatrix& x, const DiarizerConfig& cfg,
                               const std::vector<FrameRange>& initial,
                               std::span<const Eigen::Index> frame_index) {
  check_input(x, cfg, frame_index);
  if (static_cast<int>(initial.size()) != cfg.initial_states)
    throw ValidationError("number of initial segments does not match initial states");
  std::vector<std::vector<Eigen::Index>> groups;
  for (const auto& r : initial) {
    if (r.begin < 0 || r.end > x.frames() || r.begin >= r.end)
      throw ValidationError("initial segment out of range");
    std::vector<Eigen::Index> g;
    for (Eigen::Index t = r.begin; t < r.end; ++t)
      if (!cfg.no_sad_mode || x.speech_mask[static_cast<std::size_t>(t)]) g.push_back(t);
    groups.push_back(std::move(g));
  }
  return run(x, cfg, groups, cfg.no_sad_mode ? mask_rows(x, false) : std::vector<Eigen::Index>{},
             frame_index);
}

}  // namespace diarkit
