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

#include "diarkit/features.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include <fftw3.h>

namespace diarkit {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Owns the buffers and plan of a real-to-complex transform.
class RealFft {
 public:
  explicit RealFft(int n)
      : n_(n),
        in_(fftw_alloc_real(n)),
        out_(fftw_alloc_complex(n / 2 + 1)),
        plan_(fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE)) {
    if (!in_ || !out_ || !plan_) throw Error("FFT setup failed");
  }
  ~RealFft() {
    fftw_destroy_plan(plan_);
    fftw_free(out_);
    fftw_free(in_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  // Writes |X_k|^2 for k = 0..n/2.
  void power(std::vector<double>& out) {
    fftw_execute(plan_);
    out.resize(n_ / 2 + 1);
    for (int k = 0; k <= n_ / 2; ++k) {
      out[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

FeatureMatrix mfcc(std::span<const double> signal, int sample_rate, const MfccConfig& cfg) {
  if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
  if (cfg.window <= 0 || cfg.hop <= 0 || cfg.fft_size < cfg.window) {
    throw ValidationError("invalid MFCC framing (need fft_size >= window > 0, hop > 0)");
  }
  if (cfg.num_ceps < 1 || cfg.num_ceps > cfg.num_filters) {
    throw ValidationError("num_ceps must lie in [1, num_filters]");
  }
  if (signal.size() < static_cast<std::size_t>(cfg.window)) {
    throw Error("signal shorter than one analysis window (" + std::to_string(signal.size()) +
                " < " + std::to_string(cfg.window) + " samples)");
  }
  const double nyquist = 0.5 * sample_rate;
  const double high = cfg.high_hz > 0.0 ? cfg.high_hz : nyquist;
  if (cfg.low_hz < 0.0 || high > nyquist || cfg.low_hz >= high) {
    throw ValidationError("invalid mel filter range");
  }

  const int bins = cfg.fft_size / 2 + 1;
  const int nf = cfg.num_filters;
  RowMatrix fbank = RowMatrix::Zero(nf, bins);
  {
    const double mlo = hz_to_mel(cfg.low_hz), mhi = hz_to_mel(high);
    std::vector<double> edge(nf + 2);
    for (int i = 0; i < nf + 2; ++i) edge[i] = mel_to_hz(mlo + (mhi - mlo) * i / (nf + 1));
    for (int m = 0; m < nf; ++m) {
      const double l = edge[m], c = edge[m + 1], r = edge[m + 2];
      for (int k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * sample_rate / cfg.fft_size;
        if (f >= l && f <= c) {
          fbank(m, k) = (f - l) / (c - l);
        } else if (f > c && f <= r) {
          fbank(m, k) = (r - f) / (r - c);
        }
      }
    }
  }
  RowMatrix dct(cfg.num_ceps, nf);
  for (int i = 0; i < cfg.num_ceps; ++i) {
    const double scale = std::sqrt((i == 0 ? 1.0 : 2.0) / nf);
    for (int m = 0; m < nf; ++m) dct(i, m) = scale * std::cos(M_PI * i * (m + 0.5) / nf);
  }
  std::vector<double> window(cfg.window);
  for (int n = 0; n < cfg.window; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * M_PI * n / (cfg.window - 1));
  }

  std::vector<double> emph(signal.size());
  emph[0] = signal[0];
  for (std::size_t n = 1; n < signal.size(); ++n) {
    emph[n] = signal[n] - cfg.preemphasis * signal[n - 1];
  }

  const auto frames =
      static_cast<Eigen::Index>((signal.size() - cfg.window) / cfg.hop + 1);
  FeatureMatrix out;
  out.hop_sec = static_cast<double>(cfg.hop) / sample_rate;
  out.window_sec = static_cast<double>(cfg.window) / sample_rate;
  out.data.resize(frames, cfg.num_ceps);

  RealFft fft(cfg.fft_size);
  std::vector<double> power;
  Eigen::VectorXd logmel(nf);
  for (Eigen::Index t = 0; t < frames; ++t) {
    double* buf = fft.input();
    const double* x = emph.data() + t * cfg.hop;
    for (int n = 0; n < cfg.window; ++n) buf[n] = x[n] * window[n];
    std::fill(buf + cfg.window, buf + cfg.fft_size, 0.0);
    fft.power(power);
    const Eigen::Map<const Eigen::VectorXd> p(power.data(), bins);
    logmel = (fbank * p).cwiseMax(cfg.log_floor).array().log();
    out.data.row(t) = (dct * logmel).transpose();
  }
  return out;
}

CmvnResult cmvn(const FeatureMatrix& f, std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != static_cast<std::size_t>(f.frames())) {
    throw ValidationError("CMVN mask length differs from frame count");
  }
  const Eigen::Index dim = f.dim();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
  Eigen::Index n = 0;
  for (Eigen::Index t = 0; t < f.frames(); ++t) {
    if (!mask.empty() && !mask[t]) continue;
    sum += f.data.row(t).transpose();
    ++n;
  }
  if (n < 2) throw Error("CMVN needs at least 2 speech frames, got " + std::to_string(n));
  const Eigen::VectorXd mean = sum / static_cast<double>(n);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index t = 0; t < f.frames(); ++t) {
    if (!mask.empty() && !mask[t]) continue;
    sq += (f.data.row(t).transpose() - mean).array().square().matrix();
  }
  const Eigen::VectorXd var = sq / static_cast<double>(n);

  CmvnResult res;
  res.features = f;
  Eigen::VectorXd inv_std(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    if (var(d) < 1e-12) {
      inv_std(d) = 0.0;
      res.zeroed_dims.push_back(static_cast<int>(d));
    } else {
      inv_std(d) = 1.0 / std::sqrt(var(d));
    }
  }
  for (Eigen::Index t = 0; t < f.frames(); ++t) {
    res.features.data.row(t) =
        ((f.data.row(t).transpose() - mean).array() * inv_std.array()).transpose();
  }
  if (!res.zeroed_dims.empty()) {
    warn("CMVN: " + std::to_string(res.zeroed_dims.size()) +
         " constant feature dimension(s) set to zero");
  }
  return res;
}

FeatureMatrix concat_streams(std::span<const FeatureMatrix> per_channel) {
  if (per_channel.empty()) throw ValidationError("no streams to concatenate");
  const auto& first = per_channel.front();
  Eigen::Index dim = 0;
  for (std::size_t c = 0; c < per_channel.size(); ++c) {
    const auto& m = per_channel[c];
    if (m.frames() != first.frames()) {
      throw Error("stream " + std::to_string(c) + " has " + std::to_string(m.frames()) +
                  " frames, expected " + std::to_string(first.frames()));
    }
    if (std::abs(m.hop_sec - first.hop_sec) > 1e-12) {
      throw Error("stream " + std::to_string(c) + " has a different hop");
    }
    dim += m.dim();
  }
  FeatureMatrix out;
  out.hop_sec = first.hop_sec;
  out.window_sec = first.window_sec;
  out.speech_mask = first.speech_mask;
  out.data.resize(first.frames(), dim);
  Eigen::Index col = 0;
  for (const auto& m : per_channel) {
    out.data.middleCols(col, m.dim()) = m.data;
    col += m.dim();
  }
  return out;
}

FeatureMatrix splice(const FeatureMatrix& f, int left, int right) {
  if (f.frames() == 0) throw Error("cannot splice an empty feature matrix");
  if (left < 0 || right < 0) throw ValidationError("splice context must be non-negative");
  const Eigen::Index n = f.frames(), d = f.dim();
  const int width = left + right + 1;
  FeatureMatrix out;
  out.hop_sec = f.hop_sec;
  out.window_sec = f.window_sec;
  out.speech_mask = f.speech_mask;
  out.data.resize(n, d * width);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (int k = 0; k < width; ++k) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t - left + k, 0, n - 1);
      out.data.block(t, k * d, 1, d) = f.data.row(src);
    }
  }
  return out;
}

std::vector<std::uint8_t> sad_mask(Eigen::Index frames, double hop_sec, double window_sec,
                                   const std::vector<Segment>& sad) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(frames), 0);
  for (const auto& s : sad) {
    // first frame with center >= start
    const auto lo = static_cast<Eigen::Index>(
        std::max(0.0, std::ceil((s.start - 0.5 * window_sec) / hop_sec - 1e-9)));
    for (Eigen::Index t = lo; t < frames; ++t) {
      const double c = static_cast<double>(t) * hop_sec + 0.5 * window_sec;
      if (c >= s.end) break;
      if (c >= s.start) mask[t] = 1;
    }
  }
  return mask;
}

SadSelection apply_sad(const FeatureMatrix& f, const std::vector<Segment>& sad, SadMode mode) {
  auto mask = sad_mask(f.frames(), f.hop_sec, f.window_sec, sad);
  SadSelection sel;
  if (mode == SadMode::kNoSad) {
    sel.features = f;
    sel.features.speech_mask = std::move(mask);
    sel.frame_index.resize(f.frames());
    for (Eigen::Index t = 0; t < f.frames(); ++t) sel.frame_index[t] = t;
    return sel;
  }
  for (Eigen::Index t = 0; t < f.frames(); ++t) {
    if (mask[t]) sel.frame_index.push_back(t);
  }
  if (sel.frame_index.empty()) throw Error("SAD selects no speech frames");
  sel.features.hop_sec = f.hop_sec;
  sel.features.window_sec = f.window_sec;
  sel.features.data.resize(static_cast<Eigen::Index>(sel.frame_index.size()), f.dim());
  for (std::size_t i = 0; i < sel.frame_index.size(); ++i) {
    sel.features.data.row(static_cast<Eigen::Index>(i)) = f.data.row(sel.frame_index[i]);
  }
  sel.features.speech_mask.assign(sel.frame_index.size(), 1);
  return sel;
}

}  // namespace diarkit
