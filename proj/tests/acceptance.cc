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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "diarkit/dae.h"
#include "diarkit/diarizer.h"
#include "diarkit/dominance.h"
#include "diarkit/gmm.h"
#include "diarkit/pipeline.h"
#include "diarkit/scoring.h"
#include "diarkit/synth.h"
#include "diarkit/wpe.h"
#include "oracle/viterbi_oracle.h"
#include "test_util.h"

using namespace diarkit;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> equal;
  const SessionScript script = make_demo_script(4, 300.0, equal, 11);
  ChannelModel ch = default_channel_model(7, 5.0);
  ch.noise_snr_db = 15.0;
  ch.seed = 3;
  const SynthesizedSession s = synth_session(script, ch);
  const std::vector<Segment> sad = merge_intervals(s.reference);

  PipelineConfig cfg;
  cfg.diarizer.n_speakers = 4;
  cfg.diarizer.min_duration_sec = 0.5;
  cfg.diarizer.initial_states = 12;
  cfg.diarizer.components_per_segment = 2;
  testing::WarningCapture quiet;
  const PipelineResult oracle = run_diarization(s.audio, &sad, cfg);
  const double runtime = seconds_since(t0);
  const double der = score_der(s.reference, oracle.diarization.hypothesis).der;

  PipelineConfig ns = cfg;
  ns.set("mode", "no-sad");
  const PipelineResult nosad = run_diarization(s.audio, nullptr, ns);
  const double der_ns = score_der(s.reference, nosad.diarization.hypothesis).der;

  report(1, der <= 0.15 && runtime <= 300.0 && der_ns >= der - 0.01,
         fmt("oracle DER %.4f (<= 0.15), runtime %.1f s (<= 300), no-sad DER %.4f (>= %.4f)", der,
             runtime, der_ns, der - 0.01));
}

void criterion2() {
  std::mt19937_64 rng(2024);
  int ok = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int k = std::uniform_int_distribution<int>(1, 4)(rng);
    const int t = std::uniform_int_distribution<int>(1, 3)(rng);
    const int n = std::uniform_int_distribution<int>(t, 10)(rng);
    const double alpha = std::uniform_real_distribution<double>(0.5, 0.99)(rng);
    const RowMatrix e = testing::random_matrix(n, k, rng(), 2.0);
    const auto fast = viterbi({k, t, alpha}, e);
    const auto slow = oracle::brute_force(e, t, alpha);
    const double d = std::abs(fast.log_prob - slow.log_prob);
    worst = std::max(worst, d);
    ok += d < 1e-9 && fast.labels == slow.labels;
  }
  report(2, ok == 100, fmt("%d/100 instances match, max |dlogp| %.2e (< 1e-9)", ok, worst));
}

void criterion3() {
  std::mt19937_64 rng(17);
  int gmm_ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = std::uniform_int_distribution<int>(1, 8)(rng);
    const int m = std::uniform_int_distribution<int>(1, 4)(rng);
    RowMatrix x = testing::random_matrix(200, dim, rng());
    x.topRows(70).array() += 3.0;
    const auto ll = em_fit(x, m, rng()).log_likelihoods;
    bool mono = true;
    for (std::size_t i = 1; i < ll.size(); ++i) mono = mono && ll[i] >= ll[i - 1] - 1e-8;
    gmm_ok += mono;
  }

  int seg_ok = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = std::uniform_int_distribution<int>(2, 5)(rng);
    RowMatrix x = testing::random_matrix(900, 4, rng());
    const RowMatrix centers = testing::random_matrix(3, 4, rng(), 2.0);
    for (Eigen::Index t = 0; t < 900; ++t) x.row(t) += centers.row((t / 150) % 3);
    EmOptions o;
    o.variance_floor = variance_floor(x);
    HmmModel model;
    model.topology = {k, 10, 0.9};
    const auto ranges = init_segmentation(900, k);
    for (int s = 0; s < k; ++s) {
      const auto& r = ranges[static_cast<std::size_t>(s)];
      model.states.push_back(em_fit(x.middleRows(r.begin, r.size()), 2, rng(), o).model);
      model.state_ids.push_back(s);
    }
    const auto lp = segmental_em(model, x, 10, o).path_log_probs;
    bool mono = true;
    for (std::size_t i = 1; i < lp.size(); ++i) mono = mono && lp[i] >= lp[i - 1] - 1e-6;
    seg_ok += mono;
  }
  report(3, gmm_ok == 50 && seg_ok == 20,
         fmt("GMM EM monotone %d/50 (tol 1e-8), segmental EM monotone %d/20 (tol 1e-6)", gmm_ok, seg_ok));
}

void criterion4() {
  using namespace dae;
  Network net = make_network(7, {4, 2}, 11);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& l : net.layers) {
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] += n(rng);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = n(rng);
  }
  const RowMatrix x = testing::random_matrix(9, 7, 13);
  const RowMatrix target = testing::random_matrix(9, 7, 14);
  Gradients g;
  reconstruction_loss(net, x, target, &g);
  const double h = 1e-5;
  double worst = 0.0;
  std::uniform_int_distribution<std::size_t> pick_layer(0, net.layers.size() - 1);
  std::bernoulli_distribution pick_bias(0.25);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t li = trial < 4 ? static_cast<std::size_t>(trial) : pick_layer(rng);
    const bool bias = pick_bias(rng);
    auto& l = net.layers[li];
    const Eigen::Index size = bias ? l.bias.size() : l.weights.size();
    const Eigen::Index idx = std::uniform_int_distribution<Eigen::Index>(0, size - 1)(rng);
    double& p = bias ? l.bias(idx) : l.weights.data()[idx];
    const double orig = p;
    p = orig + h;
    const double up = reconstruction_loss(net, x, target);
    p = orig - h;
    const double down = reconstruction_loss(net, x, target);
    p = orig;
    const double numeric = (up - down) / (2 * h);
    const double analytic = bias ? g.biases[li](idx) : g.weights[li].data()[idx];
    worst = std::max(worst, std::abs(numeric - analytic) /
                                std::max({std::abs(numeric), std::abs(analytic), 1e-6}));
  }

  const RowMatrix u = testing::random_matrix(1, 7, 21);
  FeatureMatrix f;
  f.data = testing::random_matrix(2000, 1, 22) * u;
  TrainConfig cfg;
  cfg.hidden_dims = {4, 2};
  cfg.corruption_level = 0.0;
  cfg.epochs = 5;
  cfg.batch_size = 1;
  TrainReport rep;
  pretrain_stack(f, cfg, 5, &rep);
  const double ratio = rep.final_mse / rep.initial_mse;
  report(4, worst < 1e-4 && ratio < 0.25,
         fmt("max gradient rel err %.2e (< 1e-4), rank-1 MSE ratio after 5 epochs %.3f (< 0.25)", worst, ratio));
}

void criterion5() {
  const RowMatrix r = testing::random_matrix(1, 4096, 1);
  const std::vector<double> x(r.data(), r.data() + r.size());
  double e = 0.0;
  for (double v : x) e += v * v;
  const WptTree t = wpt(x);
  const double parseval = std::abs(t.energy() - e) / e;
  const auto back = inverse_wpt(t);
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - x[i]));

  auto tone_frac = [](double hz) {
    std::vector<double> s(4096);
    double tot = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / 8000.0);
      tot += s[i] * s[i];
    }
    return band_energy(wpt(s)) / tot;
  };
  const double f1 = tone_frac(1000.0), f3 = tone_frac(3000.0);
  report(5, err < 1e-8 && parseval < 1e-6 && f1 >= 0.9 && f3 <= 0.1,
         fmt("round trip %.2e (< 1e-8), Parseval %.2e (< 1e-6), 1 kHz in band %.4f (>= 0.90), 3 kHz %.4f (<= 0.10)",
             err, parseval, f1, f3));
}

// Two-mode diagonal Gaussian source in 4 dims.
RowMatrix sample_source(const RowMatrix& means, std::mt19937_64& rng, Eigen::Index frames) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution mode(0.5);
  RowMatrix x(frames, means.cols());
  for (Eigen::Index t = 0; t < frames; ++t) {
    const int m = mode(rng);
    for (Eigen::Index d = 0; d < x.cols(); ++d) x(t, d) = means(m, d) + n(rng);
  }
  return x;
}

void criterion6() {
  std::mt19937_64 rng(606);
  EmOptions merge_opts;
  merge_opts.max_iters = 5;
  int same_pos = 0, diff_neg = 0;
  double same_sum = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const RowMatrix src_a = testing::random_matrix(2, 4, rng(), 3.0);
    const RowMatrix src_b = testing::random_matrix(2, 4, rng(), 3.0);
    const RowMatrix a1 = sample_source(src_a, rng, 500), a2 = sample_source(src_a, rng, 500);
    const RowMatrix b1 = sample_source(src_b, rng, 500);
    const Gmm g_a1 = em_fit(a1, 2, rng()).model, g_a2 = em_fit(a2, 2, rng()).model;
    const Gmm g_b1 = em_fit(b1, 2, rng()).model;
    const double same = merge_gain(g_a1, a1, g_a2, a2, merge_opts).gain;
    const double diff = merge_gain(g_a1, a1, g_b1, b1, merge_opts).gain;
    same_sum += same;
    same_pos += same > 0.0;
    diff_neg += diff < 0.0;
  }
  report(6, same_pos >= 95 && diff_neg >= 95,
         fmt("same-source positive %d/100 (mean gain %.2f), distinct-source negative %d/100 (each >= 95)",
             same_pos, same_sum / 100.0, diff_neg));
}

void criterion7() {
  const Hypothesis ref = {{0, 10, "A"}, {10, 20, "B"}};
  const Hypothesis hyp = {{0, 12, "spk1"}, {12, 20, "spk2"}};
  const auto hand = score_der(ref, hyp);
  const bool hand_ok = der_text(hand).find("DER 0.1000") != std::string::npos &&
                       std::abs(hand.der - 0.1) < 1e-15;

  std::mt19937_64 rng(77);
  bool perm_ok = true, ident_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    Hypothesis r, h;
    std::uniform_real_distribution<double> len(0.2, 3.0);
    std::uniform_int_distribution<int> who(0, 3);
    for (double t = 0.0; t < 60.0;) {
      const double d = len(rng);
      if (who(rng) > 0) r.push_back({t, t + d, "r" + std::to_string(who(rng))});
      t += d;
    }
    for (double t = 0.0; t < 60.0;) {
      const double d = len(rng);
      h.push_back({t, t + d, "h" + std::to_string(who(rng))});
      t += d;
    }
    if (r.empty()) continue;
    Hypothesis p = h;
    for (auto& s : p) s.label = "x" + std::string(1, static_cast<char>('9' - (s.label[1] - '0')));
    perm_ok = perm_ok && std::abs(score_der(r, h).der - score_der(r, p).der) < 1e-12;
    ident_ok = ident_ok && score_der(r, r).der == 0.0;
  }
  report(7, hand_ok && perm_ok && ident_ok,
         fmt("hand example DER %.4f (exactly 0.1000), permutation invariant %s, identity zero %s", hand.der,
             perm_ok ? "yes" : "no", ident_ok ? "yes" : "no"));
}

void criterion8() {
  std::mt19937_64 rng(8);
  double worst_sum = 0.0, worst_shift = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const RowMatrix p = testing::random_matrix(1, n, rng(), 5.0);
    const Eigen::VectorXd v = p.row(0).transpose();
    const Eigen::VectorXd ds = dominance_scores(v);
    const double c = std::uniform_real_distribution<double>(-100.0, 100.0)(rng);
    worst_sum = std::max(worst_sum, std::abs(ds.sum() - 1.0));
    worst_shift = std::max(worst_shift,
                           (dominance_scores((v.array() + c).matrix()) - ds).cwiseAbs().maxCoeff());
  }

  const std::vector<double> shares = {0.4, 0.3, 0.2, 0.1};
  const SessionScript script = make_demo_script(4, 1200.0, shares, 88);
  ChannelModel ch = default_channel_model(1);
  ch.seed = 9;
  const SynthesizedSession s = synth_session(script, ch);
  const Hypothesis& ref = s.reference;
  const auto energies = segment_energy(s.audio.channels[0], s.audio.sample_rate, ref);
  const DominanceReport rep = dominance_report(ref, energies, s.audio.duration_sec());

  double window_sum_err = 0.0;
  std::vector<double> ds, share;
  const std::size_t spk = rep.speakers.size();
  for (std::size_t w = 0; w * spk < rep.rows.size(); ++w) {
    double speech = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < spk; ++i) speech += rep.rows[w * spk + i].features.spts;
    for (std::size_t i = 0; i < spk; ++i) {
      const auto& row = rep.rows[w * spk + i];
      sum += row.ds;
      ds.push_back(row.ds);
      share.push_back(row.features.spts / speech);
    }
    window_sum_err = std::max(window_sum_err, std::abs(sum - 1.0));
  }
  const auto mean = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
  };
  const double md = mean(ds), ms = mean(share);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sxy += (ds[i] - md) * (share[i] - ms);
    sxx += (ds[i] - md) * (ds[i] - md);
    syy += (share[i] - ms) * (share[i] - ms);
  }
  const double r = sxy / std::sqrt(sxx * syy);
  worst_sum = std::max(worst_sum, window_sum_err);
  report(8, worst_sum < 1e-12 && worst_shift < 1e-12 && r >= 0.9,
         fmt("max |sum DS - 1| %.1e, shift deviation %.1e (both < 1e-12), Pearson(DS, share) %.4f over %zu pairs (>= 0.9)",
             worst_sum, worst_shift, r, ds.size()));
}

void criterion9() {
  std::mt19937_64 rng(909);
  int ok = 0;
  std::string worst;
  testing::WarningCapture quiet;
  for (int trial = 0; trial < 20; ++trial) {
    const int speakers = std::uniform_int_distribution<int>(2, 4)(rng);
    const Eigen::Index frames = std::uniform_int_distribution<Eigen::Index>(2000, 4000)(rng);
    const RowMatrix centers = testing::random_matrix(speakers, 4, rng(), 1.5);
    FeatureMatrix f;
    f.data = testing::random_matrix(frames, 4, rng());
    std::uniform_int_distribution<int> run(20, 200), who(0, speakers - 1);
    for (Eigen::Index t = 0; t < frames;) {
      const int s = who(rng);
      const Eigen::Index len = std::min<Eigen::Index>(run(rng), frames - t);
      for (Eigen::Index i = 0; i < len; ++i) f.data.row(t + i) += centers.row(s);
      t += len;
    }
    DiarizerConfig cfg;
    cfg.n_speakers = 2;
    cfg.initial_states = std::uniform_int_distribution<int>(3, 8)(rng);
    cfg.min_duration_sec = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    cfg.components_per_segment = std::uniform_int_distribution<int>(1, 2)(rng);
    cfg.seed = rng();
    const int t_min = cfg.sub_states(0.01);
    const auto res = diarize(f, cfg);
    const auto& lab = res.frame_labels;
    int shortest = 1 << 30;
    bool good = true;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= lab.size(); ++i) {
      if (i == lab.size() || lab[i] != lab[begin]) {
        const int len = static_cast<int>(i - begin);
        if (i < lab.size()) {
          shortest = std::min(shortest, len);
          good = good && len >= t_min;
        }
        begin = i;
      }
    }
    ok += good;
    if (!good) worst += fmt(" [trial %d: run %d < T %d]", trial, shortest, t_min);
  }
  report(9, ok == 20, fmt("%d/20 runs honour the minimum duration%s", ok, worst.c_str()));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks = {criterion1, criterion2, criterion3,
                                                     criterion4, criterion5, criterion6,
                                                     criterion7, criterion8, criterion9};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    try {
      checks[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
