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

#include "diarkit/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "diarkit/common.h"
#include "diarkit/io_util.h"

namespace diarkit {
namespace {

constexpr double kMaxDelayMs = 50.0;
constexpr double kMinF0SeparationHz = 30.0;
constexpr double kEventRms = 0.1;
constexpr double kEdgeRampSec = 0.010;

// Two-pole resonator with unit DC gain.
class Resonator {
 public:
  void tune(double freq, double bandwidth, double rate) {
    const double r = std::exp(-M_PI * bandwidth / rate);
    a1_ = 2.0 * r * std::cos(2.0 * M_PI * freq / rate);
    a2_ = -r * r;
    g_ = 1.0 - a1_ - a2_;
  }
  double operator()(double x) {
    const double y = g_ * x + a1_ * y1_ + a2_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a1_ = 0.0, a2_ = 0.0, g_ = 1.0;
  double y1_ = 0.0, y2_ = 0.0;
};

std::vector<double> render_voice(const VoiceSpec& v, std::size_t n, int rate,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Resonator> formants(v.formants_hz.size());
  std::vector<double> out(n, 0.0);

  const double vib_rate = 4.0 + 2.0 * unit(rng);
  const double vib_phase = 2.0 * M_PI * unit(rng);
  double phase = unit(rng);
  double tilt_state = 0.0;
  std::size_t syl_start = 0, syl_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= syl_start + syl_len) {
      // New syllable: fresh vowel colouring and duration.
      syl_start = i;
      syl_len = static_cast<std::size_t>((0.15 + 0.15 * unit(rng)) * rate);
      for (std::size_t k = 0; k < formants.size(); ++k) {
        const double f = v.formants_hz[k] * (0.9 + 0.2 * unit(rng));
        formants[k].tune(f, 60.0 + 0.06 * f, rate);
      }
    }
    const double t = static_cast<double>(i) / rate;
    const double f0 = v.f0_hz * (1.0 + 0.03 * std::sin(2.0 * M_PI * vib_rate * t + vib_phase));
    phase += f0 / rate;
    double src = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      src = 1.0;
    }
    src += 0.02 * gauss(rng);
    tilt_state = (1.0 - v.tilt) * src + v.tilt * tilt_state;
    double y = tilt_state;
    for (auto& f : formants) y = f(y);
    const double u = static_cast<double>(i - syl_start) / static_cast<double>(syl_len);
    out[i] = y * (0.35 + 0.65 * std::sin(M_PI * u));
  }

  double power = 0.0;
  for (double s : out) power += s * s;
  const double rms = std::sqrt(power / std::max<std::size_t>(n, 1));
  const double scale = rms > 0.0 ? kEventRms * v.level / rms : 0.0;
  const auto ramp = static_cast<std::size_t>(kEdgeRampSec * rate);
  for (std::size_t i = 0; i < n; ++i) {
    double g = scale;
    if (i < ramp) g *= static_cast<double>(i) / ramp;
    if (n - 1 - i < ramp) g *= static_cast<double>(n - 1 - i) / ramp;
    out[i] *= g;
  }
  return out;
}

struct Palette {
  double f0;
  double tilt;
  std::vector<double> formants;
};

const std::vector<Palette>& palette() {
  static const std::vector<Palette> p = {
      {100.0, 0.90, {540.0, 1300.0, 2400.0}}, {135.0, 0.85, {700.0, 1750.0, 2900.0}},
      {170.0, 0.80, {420.0, 2100.0, 3100.0}}, {205.0, 0.75, {820.0, 1200.0, 2650.0}},
      {240.0, 0.88, {600.0, 1500.0, 3300.0}}, {275.0, 0.70, {480.0, 1900.0, 2600.0}},
      {310.0, 0.82, {760.0, 1600.0, 3000.0}}, {345.0, 0.78, {380.0, 1000.0, 2300.0}},
  };
  return p;
}

}  // namespace

void SessionScript::validate() const {
  if (total_duration_sec <= 0.0) throw ValidationError("script duration must be positive");
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    if (speakers[i].f0_hz <= 0.0) throw ValidationError("voice f0 must be positive");
    if (speakers[i].tilt < 0.0 || speakers[i].tilt >= 1.0) {
      throw ValidationError("voice tilt must lie in [0, 1)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(speakers[i].f0_hz - speakers[j].f0_hz) < kMinF0SeparationHz) {
        throw ValidationError("voices " + std::to_string(j) + " and " + std::to_string(i) +
                              " are closer than 30 Hz in f0");
      }
    }
  }
  double prev_end = 0.0;
  for (const auto& e : events) {
    if (e.speaker < 0 || static_cast<std::size_t>(e.speaker) >= speakers.size()) {
      throw ValidationError("event refers to unknown speaker " + std::to_string(e.speaker));
    }
    if (e.duration_sec <= 0.0 || e.start_sec < 0.0 ||
        e.start_sec + e.duration_sec > total_duration_sec + 1e-9) {
      throw ValidationError("event at " + format_fixed(e.start_sec, 3) +
                            " s lies outside the session");
    }
    if (e.start_sec < prev_end - 1e-9) {
      throw ValidationError("events overlap or are unordered at " +
                            format_fixed(e.start_sec, 3) + " s");
    }
    prev_end = e.start_sec + e.duration_sec;
  }
}

void ChannelModel::validate() const {
  if (delays_ms.empty()) throw ValidationError("need at least one channel");
  if (delays_ms.size() != gains.size()) {
    throw ValidationError("delays and gains differ in length");
  }
  for (double d : delays_ms) {
    if (d < 0.0 || d > kMaxDelayMs) {
      throw ValidationError("channel delay " + format_fixed(d, 2) +
                            " ms outside [0, 50] ms");
    }
  }
  for (double g : gains) {
    if (!(g > 0.0)) throw ValidationError("channel gains must be positive");
  }
  if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
}

ChannelModel default_channel_model(std::size_t channels, double max_delay_ms,
                                   double min_gain) {
  ChannelModel m;
  for (std::size_t c = 0; c < channels; ++c) {
    const double u = channels > 1 ? static_cast<double>(c) / (channels - 1) : 0.0;
    m.delays_ms.push_back(u * max_delay_ms);
    m.gains.push_back(1.0 - u * (1.0 - min_gain));
  }
  return m;
}

Hypothesis script_reference(const SessionScript& script) {
  Hypothesis ref;
  for (const auto& e : script.events) {
    ref.push_back({e.start_sec, e.start_sec + e.duration_sec, "spk" + std::to_string(e.speaker)});
  }
  return ref;
}

SynthesizedSession synth_session(const SessionScript& script, const ChannelModel& model) {
  script.validate();
  model.validate();
  const int rate = model.sample_rate;
  const auto len = static_cast<std::size_t>(std::llround(script.total_duration_sec * rate));
  std::vector<std::size_t> delay(model.channel_count());
  for (std::size_t c = 0; c < delay.size(); ++c) {
    delay[c] = static_cast<std::size_t>(std::llround(model.delays_ms[c] * rate / 1000.0));
  }
  const std::size_t pad = *std::max_element(delay.begin(), delay.end());

  std::mt19937_64 rng(model.seed);
  // mix index i corresponds to session sample i - pad
  std::vector<double> mix(len + pad, 0.0);
  double speech_power = 0.0;
  std::size_t speech_samples = 0;
  for (const auto& e : script.events) {
    const auto start = static_cast<std::size_t>(std::llround(e.start_sec * rate));
    const auto n = std::min(static_cast<std::size_t>(std::llround(e.duration_sec * rate)),
                            len - std::min(len, start));
    const auto voice = render_voice(script.speakers[e.speaker], n, rate, rng);
    for (std::size_t i = 0; i < n; ++i) {
      mix[pad + start + i] += voice[i];
      speech_power += voice[i] * voice[i];
    }
    speech_samples += n;
  }
  const double ref_power =
      speech_samples > 0 ? speech_power / speech_samples : kEventRms * kEventRms;
  const double noise_sigma = std::sqrt(ref_power / std::pow(10.0, model.noise_snr_db / 10.0));
  std::normal_distribution<double> gauss(0.0, noise_sigma);
  for (auto& s : mix) s += gauss(rng);

  double peak = 0.0;
  for (double s : mix) peak = std::max(peak, std::abs(s));
  const double norm = peak > 0.95 ? 0.95 / peak : 1.0;

  SynthesizedSession out;
  out.audio.sample_rate = rate;
  out.audio.channels.resize(model.channel_count());
  for (std::size_t c = 0; c < model.channel_count(); ++c) {
    auto& ch = out.audio.channels[c];
    ch.resize(len);
    const double g = model.gains[c] * norm;
    for (std::size_t i = 0; i < len; ++i) ch[i] = g * mix[i + pad - delay[c]];
  }
  out.reference = script_reference(script);
  return out;
}

SessionScript make_demo_script(int n_speakers, double total_sec, std::span<const double> shares,
                               std::uint64_t seed, double min_turn_sec, double max_turn_sec) {
  const auto& pal = palette();
  if (n_speakers < 1 || static_cast<std::size_t>(n_speakers) > pal.size()) {
    throw ValidationError("demo scripts support 1 to 8 speakers");
  }
  if (!shares.empty() && shares.size() != static_cast<std::size_t>(n_speakers)) {
    throw ValidationError("need one share per speaker");
  }
  if (min_turn_sec <= 0.0 || max_turn_sec < min_turn_sec) {
    throw ValidationError("invalid turn length range");
  }
  SessionScript s;
  s.total_duration_sec = total_sec;
  for (int i = 0; i < n_speakers; ++i) {
    s.speakers.push_back({pal[i].f0, pal[i].tilt, pal[i].formants, 1.0});
  }
  std::vector<double> w(shares.begin(), shares.end());
  if (w.empty()) w.assign(n_speakers, 1.0);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double t = 0.1;
  int prev = -1;
  while (true) {
    const int spk = pick(rng);
    double gap = unit(rng) < 0.7 ? 0.05 + 0.45 * unit(rng) : 0.0;
    if (spk == prev && gap < 0.2) gap = 0.2;
    const double dur = min_turn_sec + (max_turn_sec - min_turn_sec) * unit(rng);
    const double start = t + gap;
    if (start + dur > total_sec - 0.1) break;
    s.events.push_back({spk, start, dur});
    t = start + dur;
    prev = spk;
  }
  return s;
}

SessionScript read_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open script file '" + path.string() + "'");
  SessionScript s;
  try {
    const auto j = nlohmann::json::parse(in);
    s.total_duration_sec = j.at("total_duration_sec").get<double>();
    for (const auto& v : j.at("speakers")) {
      VoiceSpec spec;
      spec.f0_hz = v.at("f0_hz").get<double>();
      spec.tilt = v.value("tilt", 0.85);
      spec.formants_hz = v.at("formants_hz").get<std::vector<double>>();
      spec.level = v.value("level", 1.0);
      s.speakers.push_back(std::move(spec));
    }
    for (const auto& e : j.at("events")) {
      s.events.push_back({e.at("speaker").get<int>(), e.at("start").get<double>(),
                          e.at("duration").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "': malformed script: " + e.what());
  }
  s.validate();
  return s;
}

void write_script(const std::filesystem::path& path, const SessionScript& script) {
  nlohmann::json j;
  j["total_duration_sec"] = script.total_duration_sec;
  j["speakers"] = nlohmann::json::array();
  for (const auto& v : script.speakers) {
    j["speakers"].push_back(
        {{"f0_hz", v.f0_hz}, {"tilt", v.tilt}, {"formants_hz", v.formants_hz}, {"level", v.level}});
  }
  j["events"] = nlohmann::json::array();
  for (const auto& e : script.events) {
    j["events"].push_back(
        {{"speaker", e.speaker}, {"start", e.start_sec}, {"duration", e.duration_sec}});
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace diarkit
