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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "diarkit/audio_io.h"
#include "diarkit/resample.h"
#include "diarkit/segments.h"
#include "diarkit/synth.h"
#include "diarkit/wav.h"
#include "test_util.h"

using namespace diarkit;
namespace fs = std::filesystem;

namespace {

std::vector<double> sine(double freq, double rate, std::size_t n, double amp = 1.0) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return s;
}

void put(std::ofstream& os, std::uint32_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

// Hand-rolled writer for formats write_wav() does not emit.
void write_raw_wav(const fs::path& p, int format, int channels, int rate, int bits,
                   const std::vector<std::uint8_t>& data) {
  std::ofstream os(p, std::ios::binary);
  os.write("RIFF", 4);
  put(os, 36 + static_cast<std::uint32_t>(data.size()), 4);
  os.write("WAVEfmt ", 8);
  put(os, 16, 4);
  put(os, format, 2);
  put(os, channels, 2);
  put(os, rate, 4);
  put(os, rate * channels * bits / 8, 4);
  put(os, channels * bits / 8, 2);
  put(os, bits, 2);
  os.write("data", 4);
  put(os, static_cast<std::uint32_t>(data.size()), 4);
  os.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

std::vector<std::uint8_t> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<std::uint8_t> out;
  for (auto s : v) {
    out.push_back(static_cast<std::uint8_t>(s & 0xff));
    out.push_back(static_cast<std::uint8_t>((static_cast<std::uint16_t>(s) >> 8) & 0xff));
  }
  return out;
}

// Amplitude and best frequency (0.1 Hz grid near f0) of a tone.
std::pair<double, double> tone_fit(const std::vector<double>& x, double rate, double f0) {
  double best_f = f0, best_mag = -1.0;
  for (double f = f0 - 5.0; f <= f0 + 5.0; f += 0.1) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      re += x[i] * std::cos(2 * std::numbers::pi * f * i / rate);
      im += x[i] * std::sin(2 * std::numbers::pi * f * i / rate);
    }
    const double mag = std::hypot(re, im);
    if (mag > best_mag) {
      best_mag = mag;
      best_f = f;
    }
  }
  return {2.0 * best_mag / static_cast<double>(x.size()), best_f};
}

SessionScript small_script() {
  SessionScript s;
  s.total_duration_sec = 4.0;
  s.speakers.push_back({110.0, 0.8, {700, 1200, 2500}, 1.0});
  s.speakers.push_back({190.0, 0.7, {400, 2000, 2800}, 1.0});
  s.events = {{0, 0.2, 1.5}, {1, 2.0, 1.6}};
  return s;
}

}  // namespace

TEST_CASE("16-bit WAV round trip through write_wav/read_wav") {
  const auto dir = testing::scratch_dir("wav_rt");
  std::vector<double> x = {0.0, 0.5, -0.5, 0.25, -1.0, 1.0};
  write_wav(dir / "a.wav", x, 8000);
  const WavData w = read_wav(dir / "a.wav");
  REQUIRE(w.channels.size() == 1);
  CHECK(w.sample_rate == 8000);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(w.channels[0][i] == doctest::Approx(std::lround(x[i] * 32767) / 32768.0).epsilon(1e-12));
}

TEST_CASE("32-bit float and interleaved multi-channel WAVs") {
  const auto dir = testing::scratch_dir("wav_fmt");
  std::vector<float> f = {0.1f, -0.2f, 0.3f, -0.4f};
  std::vector<std::uint8_t> bytes(f.size() * 4);
  std::memcpy(bytes.data(), f.data(), bytes.size());
  write_raw_wav(dir / "f.wav", 3, 1, 8000, 32, bytes);
  const WavData w = read_wav(dir / "f.wav");
  REQUIRE(w.channels[0].size() == 4);
  CHECK(w.channels[0][2] == doctest::Approx(0.3).epsilon(1e-7));

  // frames: (100, -100), (200, -200), (300, -300)
  write_raw_wav(dir / "st.wav", 1, 2, 8000, 16, pcm16({100, -100, 200, -200, 300, -300}));
  const MultiStreamAudio a = load_session({dir / "st.wav"});
  REQUIRE(a.channel_count() == 2);
  CHECK(a.channels[0][1] == 200 / 32768.0);
  CHECK(a.channels[1][2] == -300 / 32768.0);
}

TEST_CASE("load_session error cases name the offending path") {
  const auto dir = testing::scratch_dir("load_err");
  write_wav(dir / "ok.wav", std::vector<double>(8000, 0.1), 8000);
  write_raw_wav(dir / "st.wav", 1, 2, 8000, 16, pcm16(std::vector<std::int16_t>(16000, 5)));
  write_raw_wav(dir / "empty.wav", 1, 1, 8000, 16, {});
  write_wav(dir / "short.wav", std::vector<double>(7000, 0.1), 8000);
  write_wav(dir / "close.wav", std::vector<double>(7950, 0.1), 8000);

  auto message = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message([&] { load_session({dir / "ok.wav", dir / "st.wav"}); }).find("st.wav") != std::string::npos);
  CHECK(message([&] { load_session({dir / "empty.wav"}); }).find("empty.wav") != std::string::npos);
  CHECK(message([&] { load_session({dir / "ok.wav", dir / "short.wav"}); }).find("short.wav") != std::string::npos);
  CHECK(message([&] { load_session({dir / "missing.wav"}); }).find("missing.wav") != std::string::npos);
  // 50 samples = 6.25 ms is within one hop; truncated to the shortest.
  const auto a = load_session({dir / "ok.wav", dir / "close.wav"});
  CHECK(a.length() == 7950);
}

TEST_CASE("resampler passes equal rates through bit-identically") {
  const auto dir = testing::scratch_dir("ident");
  std::vector<std::int16_t> raw = {0, 1, -1, 12345, -32768, 32767, 77};
  write_raw_wav(dir / "x.wav", 1, 1, 8000, 16, pcm16(raw));
  const auto a = load_session({dir / "x.wav"});
  REQUIRE(a.length() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(a.channels[0][i] == raw[i] / 32768.0);
}

TEST_CASE("1 kHz sine at 16 kHz resampled to 8 kHz stays a 1 kHz sine") {
  const auto in = sine(1000.0, 16000.0, 32000, 0.8);
  const auto out = resample(in, 16000, 8000);
  CHECK(out.size() == 16000);
  // Interior second, away from filter edge effects.
  const std::vector<double> mid(out.begin() + 4000, out.begin() + 12000);
  const auto [amp, freq] = tone_fit(mid, 8000.0, 1000.0);
  CHECK(std::abs(freq - 1000.0) <= 1.0);
  CHECK(std::abs(amp - 0.8) / 0.8 <= 0.01);
  // Sample-wise agreement with the analytic 8 kHz sine.
  const auto ref = sine(1000.0, 8000.0, 16000, 0.8);
  double worst = 0.0;
  for (std::size_t i = 4000; i < 12000; ++i) worst = std::max(worst, std::abs(out[i] - ref[i]));
  CHECK(worst < 0.01);
}

TEST_CASE("resampling preserves duration within one hop") {
  for (int in_rate : {44100, 16000, 22050, 48000, 11025}) {
    const std::vector<double> x(static_cast<std::size_t>(in_rate * 3 + 17), 0.0);
    const auto y = resample(x, in_rate, 8000);
    CHECK(std::abs(y.size() / 8000.0 - x.size() / static_cast<double>(in_rate)) < 0.010);
  }
}

TEST_CASE("44.1 kHz multi-file session loads as C channels at 8 kHz") {
  const auto dir = testing::scratch_dir("multi");
  std::vector<fs::path> paths;
  for (int c = 0; c < 3; ++c) {
    paths.push_back(dir / ("c" + std::to_string(c) + ".wav"));
    write_wav(paths.back(), sine(300.0 + 100 * c, 44100.0, 44100 * 2, 0.3), 44100);
  }
  const auto a = load_session(paths);
  CHECK(a.channel_count() == 3);
  CHECK(a.sample_rate == 8000);
  CHECK(a.length() == 16000);
}

TEST_CASE("synth_session shapes, reference and determinism") {
  const auto script = make_demo_script(4, 300.0, {}, 7);
  const auto model = default_channel_model(7, 5.0, 0.5);
  const auto s = synth_session(script, model);
  CHECK(s.audio.channel_count() == 7);
  CHECK(s.audio.sample_rate == 8000);
  CHECK(s.audio.length() == 2400000);
  REQUIRE(s.reference.size() == script.events.size());
  for (std::size_t i = 0; i < script.events.size(); ++i) {
    CHECK(s.reference[i].start == script.events[i].start_sec);
    CHECK(s.reference[i].end == doctest::Approx(script.events[i].start_sec + script.events[i].duration_sec));
    CHECK(s.reference[i].label == "spk" + std::to_string(script.events[i].speaker));
  }
  for (const auto& ch : s.audio.channels)
    for (double v : ch) REQUIRE(std::abs(v) <= 1.0);
  const auto again = synth_session(script, model);
  CHECK(again.audio.channels == s.audio.channels);
}

TEST_CASE("each channel is a delayed copy of channel 0") {
  const auto script = small_script();
  auto model = default_channel_model(4, 5.0, 0.5);
  const auto s = synth_session(script, model);
  const auto& c0 = s.audio.channels[0];
  for (std::size_t c = 1; c < 4; ++c) {
    const auto& cc = s.audio.channels[c];
    int best_lag = -1;
    double best = -1e300;
    for (int lag = 0; lag <= 60; ++lag) {
      double acc = 0.0;
      for (std::size_t i = 200; i + 200 < c0.size(); ++i) acc += c0[i] * cc[i + lag];
      if (acc > best) {
        best = acc;
        best_lag = lag;
      }
    }
    const double expected = model.delays_ms[c] * 8.0;
    CHECK(std::abs(best_lag - expected) <= 1.0);
  }
}

TEST_CASE("synth edge cases and validation") {
  SessionScript empty;
  empty.total_duration_sec = 1.0;
  empty.speakers.push_back({120.0, 0.8, {500}, 1.0});
  const auto s = synth_session(empty, default_channel_model(2));
  CHECK(s.reference.empty());
  double energy = 0.0;
  for (double v : s.audio.channels[0]) energy += v * v;
  CHECK(energy > 0.0);

  auto model = default_channel_model(2);
  model.delays_ms = {0.0, 60.0};
  CHECK_THROWS_AS(synth_session(small_script(), model), ValidationError);

  auto close = small_script();
  close.speakers[1].f0_hz = close.speakers[0].f0_hz + 20.0;
  CHECK_THROWS_AS(synth_session(close, default_channel_model(1)), ValidationError);

  auto overlap = small_script();
  overlap.events[1].start_sec = 1.0;
  CHECK_THROWS_AS(synth_session(overlap, default_channel_model(1)), ValidationError);
}

TEST_CASE("script JSON round trip") {
  const auto dir = testing::scratch_dir("script");
  const auto script = make_demo_script(3, 60.0, std::vector<double>{0.5, 0.3, 0.2}, 3);
  write_script(dir / "s.json", script);
  const auto back = read_script(dir / "s.json");
  CHECK(back.events.size() == script.events.size());
  CHECK(back.speakers.size() == 3);
  CHECK(script_reference(back) == script_reference(script));
}

TEST_CASE("read_segments examples") {
  std::istringstream a("0.00 2.50\n3.10 7.00\n");
  const auto s = parse_segments(a, "sad.txt");
  REQUIRE(s.size() == 2);
  CHECK(s[0] == Segment{0.0, 2.5, ""});
  CHECK(s[1] == Segment{3.1, 7.0, ""});

  std::istringstream b("5.0 4.0\n");
  try {
    parse_segments(b, "bad.txt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("end before start at line 1") != std::string::npos);
  }

  std::istringstream c("# comment\n1 2 A\n1.5 3 B\n");
  CHECK_THROWS_AS(parse_segments(c, "ref"), Error);

  std::istringstream d("SPEAKER s1 1 0.500 2.000 <NA> <NA> spk0 <NA> <NA>\nSPKR-INFO s1 1 <NA> <NA> <NA> unknown spk0 <NA> <NA>\n");
  const auto r = parse_segments(d, "x.rttm");
  REQUIRE(r.size() == 1);
  CHECK(r[0].start == 0.5);
  CHECK(r[0].end == 2.5);
  CHECK(r[0].label == "spk0");

  std::istringstream e("0 1\nabc 2\n");
  try {
    parse_segments(e, "e.txt");
    FAIL("expected an error");
  } catch (const Error& ex) {
    CHECK(std::string(ex.what()).find("line 2") != std::string::npos);
  }
}
