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

#include "diarkit/resample.h"

#include <cmath>
#include <numeric>

#include "diarkit/common.h"

namespace diarkit {
namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

double kaiser(double x, double beta) {
  // x in [-1, 1]
  const double r = 1.0 - x * x;
  if (r <= 0.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(r)) / std::cyl_bessel_i(0.0, beta);
}

}  // namespace

std::vector<double> resample(std::span<const double> in, int in_rate, int out_rate,
                             const ResamplerConfig& cfg) {
  if (in_rate <= 0 || out_rate <= 0) throw ValidationError("sample rates must be positive");
  if (in_rate == out_rate) return {in.begin(), in.end()};

  const long g = std::gcd(in_rate, out_rate);
  const long up = out_rate / g;    // L
  const long down = in_rate / g;   // M
  const std::size_t out_len =
      static_cast<std::size_t>(static_cast<long double>(in.size()) * up / down);

  // Everything below is measured in input samples.
  const double ratio = std::min(1.0, static_cast<double>(up) / down);
  const double fc = 0.5 * ratio * cfg.cutoff;  // cycles per input sample
  const double half_width = cfg.half_taps / ratio;
  const long reach = static_cast<long>(std::ceil(half_width));
  const long taps = 2 * reach + 1;

  // One kernel per fractional phase p/L; each normalized to unit DC gain.
  std::vector<double> bank(static_cast<std::size_t>(up * taps));
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    double* h = bank.data() + p * taps;
    double sum = 0.0;
    for (long j = 0; j < taps; ++j) {
      const double t = static_cast<double>(j - reach) - frac;
      const double v =
          std::abs(t) >= half_width ? 0.0 : 2.0 * fc * sinc(2.0 * fc * t) * kaiser(t / half_width, cfg.kaiser_beta);
      h[j] = v;
      sum += v;
    }
    for (long j = 0; j < taps; ++j) h[j] /= sum;
  }

  std::vector<double> out(out_len, 0.0);
  const long n_in = static_cast<long>(in.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const long num = static_cast<long>(n) * down;
    const long base = num / up;
    const long phase = num % up;
    const double* h = bank.data() + phase * taps;
    double acc = 0.0;
    const long first = base - reach;
    const long j0 = std::max(0L, -first);
    const long j1 = std::min(taps, n_in - first);
    for (long j = j0; j < j1; ++j) acc += h[j] * in[static_cast<std::size_t>(first + j)];
    out[n] = acc;
  }
  return out;
}

}  // namespace diarkit
