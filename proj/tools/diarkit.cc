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

// diarkit command-line front end.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diarkit/audio_io.h"
#include "diarkit/common.h"
#include "diarkit/config.h"
#include "diarkit/dominance.h"
#include "diarkit/features.h"
#include "diarkit/io_util.h"
#include "diarkit/pipeline.h"
#include "diarkit/scoring.h"
#include "diarkit/synth.h"
#include "diarkit/wav.h"
#include "diarkit/wpe.h"

namespace fs = std::filesystem;
using namespace diarkit;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("DIARKIT_SEED")) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos);
      if (pos == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("DIARKIT_SEED is not an unsigned integer: '") + env + "'");
  }
  return 7;
}

struct SynthArgs {
  std::string script;
  std::string out_dir;
  int channels = 7;
  double max_delay_ms = 5.0;
  double min_gain = 0.5;
  double snr_db = 15.0;
  std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
  const SessionScript script = read_script(a.script);
  ChannelModel model = default_channel_model(static_cast<std::size_t>(a.channels), a.max_delay_ms, a.min_gain);
  model.noise_snr_db = a.snr_db;
  model.seed = a.seed ? *a.seed : default_seed();
  const SynthesizedSession s = synth_session(script, model);
  fs::create_directories(a.out_dir);
  for (std::size_t c = 0; c < s.audio.channel_count(); ++c)
    write_wav(fs::path(a.out_dir) / ("ch" + std::to_string(c) + ".wav"), s.audio.channels[c],
              s.audio.sample_rate);
  rttm_write(s.reference, fs::path(a.out_dir) / "ref.rttm", "session");
  write_segments(fs::path(a.out_dir) / "sad.txt", merge_intervals(s.reference));
  std::cout << "wrote " << s.audio.channel_count() << " channels, "
            << format_fixed(s.audio.duration_sec(), 3) << " s, " << s.reference.size()
            << " reference segments to " << a.out_dir << '\n';
  return 0;
}

struct ScriptArgs {
  std::string out;
  int speakers = 4;
  double duration = 300.0;
  std::vector<double> shares;
  double min_turn = 1.0;
  double max_turn = 4.0;
  std::optional<std::uint64_t> seed;
};

int cmd_script(const ScriptArgs& a) {
  const auto script = make_demo_script(a.speakers, a.duration, a.shares,
                                       a.seed ? *a.seed : default_seed(), a.min_turn, a.max_turn);
  write_script(a.out, script);
  return 0;
}

struct DiarizeArgs {
  std::vector<std::string> audio;
  std::string sad;
  bool no_sad = false;
  std::optional<int> speakers;
  std::optional<double> min_dur;
  std::optional<int> initial_states;
  std::optional<int> components;
  std::optional<std::string> features;
  std::string dae_model;
  std::string save_dae;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
  std::string out;
  std::string meta;
  std::string file_id;
};

int cmd_diarize(const DiarizeArgs& a) {
  PipelineConfig cfg;
  cfg.seed = default_seed();
  cfg.diarizer.seed = cfg.seed;
  if (!a.config.empty()) apply_config_file(cfg, a.config);
  for (const auto& kv : a.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.no_sad) cfg.diarizer.no_sad_mode = true;
  else if (!a.sad.empty()) cfg.diarizer.no_sad_mode = false;
  if (a.speakers) cfg.diarizer.n_speakers = *a.speakers;
  if (a.min_dur) cfg.diarizer.min_duration_sec = *a.min_dur;
  if (a.initial_states) cfg.diarizer.initial_states = *a.initial_states;
  if (a.components) cfg.diarizer.components_per_segment = *a.components;
  if (a.features) cfg.set("features", *a.features);
  if (a.seed) cfg.set("seed", std::to_string(*a.seed));
  if (cfg.diarizer.n_speakers < 2)
    throw ValidationError("need >= 2 speakers (got " + std::to_string(cfg.diarizer.n_speakers) + ")");
  if (!cfg.diarizer.no_sad_mode && a.sad.empty())
    throw ValidationError("oracle-SAD mode needs --sad FILE (or pass --no-sad)");
  cfg.validate();

  std::vector<fs::path> paths(a.audio.begin(), a.audio.end());
  LoadOptions lo;
  lo.target_rate = cfg.sample_rate;
  const MultiStreamAudio audio = load_session(paths, lo);
  std::vector<Segment> sad;
  if (!cfg.diarizer.no_sad_mode) sad = read_segments(a.sad);
  std::optional<dae::Network> pretrained;
  if (!a.dae_model.empty()) pretrained = dae::load_network(a.dae_model);

  const PipelineResult r = run_diarization(audio, cfg.diarizer.no_sad_mode ? nullptr : &sad, cfg,
                                           pretrained ? &*pretrained : nullptr);
  const std::string file_id = a.file_id.empty() ? fs::path(a.audio.front()).stem().string() : a.file_id;
  if (a.out.empty()) {
    std::cout << rttm_format(r.diarization.hypothesis, file_id);
  } else {
    rttm_write(r.diarization.hypothesis, a.out, file_id);
  }
  const std::string meta = metadata_json(r, cfg) + "\n";
  if (!a.meta.empty()) write_file_atomic(a.meta, meta);
  if (!a.save_dae.empty() && cfg.features == FeatureKind::kBnf) dae::save_network(a.save_dae, r.network);
  std::cerr << "diarized " << format_fixed(r.duration_sec, 1) << " s: "
            << r.diarization.final_speaker_states << " speakers (" << r.diarization.stop_reason
            << ")\n";
  return 0;
}

struct ScoreArgs {
  std::string ref;
  std::string hyp;
  double collar = 0.0;
  bool json = false;
};

int cmd_score(const ScoreArgs& a) {
  const DerBreakdown b = score_der(rttm_read(a.ref), rttm_read(a.hyp), a.collar);
  if (a.json)
    std::cout << der_json(b) << '\n';
  else
    std::cout << der_text(b);
  return 0;
}

struct DominanceArgs {
  std::string hyp;
  std::string audio;
  double segment_len = 300.0;
  std::string out;
};

int cmd_dominance(const DominanceArgs& a) {
  if (!(a.segment_len > 0.0)) throw ValidationError("--segment-len must be positive");
  const Hypothesis hyp = rttm_read(a.hyp);
  const MultiStreamAudio audio = load_session({a.audio});
  std::vector<Segment> speech;
  for (const auto& s : hyp)
    if (s.label != kNonSpeechLabel) speech.push_back(s);
  // RTTM times are rounded; keep the last segment inside the audio.
  for (auto& s : speech) s.end = std::min(s.end, audio.duration_sec());
  const auto energies = segment_energy(audio.channels.front(), audio.sample_rate, speech);
  const DominanceReport rep = dominance_report(speech, energies, audio.duration_sec(), a.segment_len);
  const std::string csv = dominance_csv(rep);
  if (a.out.empty())
    std::cout << csv;
  else
    write_file_atomic(a.out, csv);
  return 0;
}

struct FeaturesArgs {
  std::vector<std::string> audio;
  std::string sad;
  std::string stage = "splice";
  std::string config;
  std::string out;
};

int cmd_features(const FeaturesArgs& a) {
  PipelineConfig cfg;
  cfg.seed = default_seed();
  if (!a.config.empty()) apply_config_file(cfg, a.config);
  const FeatureStage stage = parse_feature_stage(a.stage);
  cfg.validate();
  LoadOptions lo;
  lo.target_rate = cfg.sample_rate;
  const MultiStreamAudio audio = load_session(std::vector<fs::path>(a.audio.begin(), a.audio.end()), lo);
  std::vector<Segment> sad;
  if (!a.sad.empty()) sad = read_segments(a.sad);
  const FeatureMatrix f = feature_stage(audio, a.sad.empty() ? nullptr : &sad, cfg, stage);
  write_feature_dump(a.out, f);
  std::cout << f.frames() << " frames x " << f.dim() << " dims\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-stream speaker diarization and dominance toolkit"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Render a session script to multi-channel WAVs, reference RTTM and SAD");
  s->add_option("script", synth.script, "Session script (JSON)")->required()->check(CLI::ExistingFile);
  s->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  s->add_option("--channels", synth.channels, "Number of channels")->check(CLI::Range(1, 64));
  s->add_option("--max-delay-ms", synth.max_delay_ms, "Largest channel delay");
  s->add_option("--min-gain", synth.min_gain, "Smallest channel gain");
  s->add_option("--snr-db", synth.snr_db, "Speech-to-noise ratio");
  s->add_option("--seed", synth.seed, "Noise seed");

  ScriptArgs script;
  auto* sc = app.add_subcommand("script", "Generate a random turn-taking session script");
  sc->add_option("--out", script.out, "Script path")->required();
  sc->add_option("--speakers", script.speakers, "Number of speakers")->check(CLI::Range(1, 8));
  sc->add_option("--duration", script.duration, "Session length in seconds");
  sc->add_option("--shares", script.shares, "Per-speaker activity shares")->delimiter(',');
  sc->add_option("--min-turn", script.min_turn, "Shortest turn in seconds");
  sc->add_option("--max-turn", script.max_turn, "Longest turn in seconds");
  sc->add_option("--seed", script.seed, "Script seed");

  DiarizeArgs dz;
  auto* d = app.add_subcommand("diarize", "Diarize a multi-stream session");
  d->add_option("audio", dz.audio, "One WAV per channel, or one multi-channel WAV")
      ->required()->check(CLI::ExistingFile);
  auto* sad_opt = d->add_option("--sad", dz.sad, "Oracle speech segments")->check(CLI::ExistingFile);
  auto* nosad_opt = d->add_flag("--no-sad", dz.no_sad, "Model non-speech as an extra HMM state");
  sad_opt->excludes(nosad_opt);
  d->add_option("--speakers", dz.speakers, "Target number of speakers");
  d->add_option("--min-dur", dz.min_dur, "Minimum speaker-turn duration in seconds");
  d->add_option("--initial-states", dz.initial_states, "Initial number of HMM states");
  d->add_option("--components", dz.components, "Gaussians per initial state");
  d->add_option("--features", dz.features, "bnf or mfcc91");
  d->add_option("--dae-model", dz.dae_model, "Reuse a trained DAE")->check(CLI::ExistingFile);
  d->add_option("--save-dae", dz.save_dae, "Write the trained DAE");
  d->add_option("--config", dz.config, "key=value config file")->check(CLI::ExistingFile);
  d->add_option("--set", dz.set, "Override a config key (key=value)");
  d->add_option("--seed", dz.seed, "Random seed");
  d->add_option("--out", dz.out, "Output RTTM (stdout when omitted)");
  d->add_option("--meta", dz.meta, "Output JSON-lines metadata");
  d->add_option("--file-id", dz.file_id, "RTTM file id (default: first audio stem)");

  ScoreArgs sa;
  auto* sco = app.add_subcommand("score", "Diarization error rate of a hypothesis RTTM");
  sco->add_option("--ref", sa.ref, "Reference RTTM")->required()->check(CLI::ExistingFile);
  sco->add_option("--hyp", sa.hyp, "Hypothesis RTTM")->required()->check(CLI::ExistingFile);
  sco->add_option("--collar", sa.collar, "Unscored collar around reference boundaries")->check(CLI::NonNegativeNumber);
  sco->add_flag("--json", sa.json, "Print a JSON object instead of text");

  DominanceArgs da;
  auto* dom = app.add_subcommand("dominance", "Per-window speaker dominance scores");
  dom->add_option("--hyp", da.hyp, "Diarization RTTM")->required()->check(CLI::ExistingFile);
  dom->add_option("--audio", da.audio, "Reference-channel WAV")->required()->check(CLI::ExistingFile);
  dom->add_option("--segment-len", da.segment_len, "Window length in seconds");
  dom->add_option("--out", da.out, "Output CSV (stdout when omitted)");

  FeaturesArgs fa;
  auto* fe = app.add_subcommand("features", "Dump intermediate features");
  fe->add_option("audio", fa.audio, "Channel WAVs")->required()->check(CLI::ExistingFile);
  fe->add_option("--sad", fa.sad, "Speech segments for CMVN/DAE statistics")->check(CLI::ExistingFile);
  fe->add_option("--stage", fa.stage, "mfcc|cmvn|concat|splice|bnf");
  fe->add_option("--config", fa.config, "key=value config file")->check(CLI::ExistingFile);
  fe->add_option("--out", fa.out, "Output dump")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*sc) return cmd_script(script);
    if (*d) return cmd_diarize(dz);
    if (*sco) return cmd_score(sa);
    if (*dom) return cmd_dominance(da);
    if (*fe) return cmd_features(fa);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
