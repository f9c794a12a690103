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

#include "diarkit/wpe.h"

#include <cmath>
#include <string>

#include "diarkit/common.h"

namespace diarkit {

const std::array<double, 12> kSym6Lowpass = {
    0.015404109327027373, 0.0034907120842174702, -0.11799011114819057, -0.048311742585633,
    0.4910559419267466,   0.787641141030194,     0.3379294217276218,   -0.07263752278646252,
    -0.021060292512300564, 0.04472490177066578,  0.0017677118642428036, -0.007800708325034148};

std::array<double, 12> sym6_highpass() {
  std::array<double, 12> g{};
  for (std::size_t n = 0; n < 12; ++n) g[n] = (n % 2 ? -1.0 : 1.0) * kSym6Lowpass[11 - n];
  return g;
}

namespace {

// y[k] = sum_n f[n] x[(2k + n) mod N]
std::vector<double> analyze(const std::vector<double>& x, const std::array<double, 12>& f) {
  const std::size_t n = x.size(), half = n / 2;
  std::vector<double> y(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 12; ++j) acc += f[j] * x[(2 * k + j) % n];
    y[k] = acc;
  }
  return y;
}

// Adjoint of analyze(), accumulated into x.
void synthesize(const std::vector<double>& y, const std::array<double, 12>& f,
                std::vector<double>& x) {
  const std::size_t n = x.size();
  for (std::size_t k = 0; k < y.size(); ++k)
    for (std::size_t j = 0; j < 12; ++j) x[(2 * k + j) % n] += f[j] * y[k];
}

}  // namespace

double WptTree::energy() const {
  double e = 0.0;
  for (const auto& leaf : leaves)
    for (double c : leaf) e += c * c;
  return e;
}

WptTree wpt(std::span<const double> signal, int depth) {
  if (depth < 1 || depth > 16) throw ValidationError("wavelet depth must be in [1, 16]");
  const std::size_t block = std::size_t{1} << depth;
  if (signal.size() < block)
    throw ValidationError("signal too short for a depth-" + std::to_string(depth) +
                          " packet tree (" + std::to_string(signal.size()) + " < " +
                          std::to_string(block) + " samples)");
  const auto g = sym6_highpass();
  const std::size_t padded = (signal.size() + block - 1) / block * block;
  std::vector<std::vector<double>> level(1, std::vector<double>(padded, 0.0));
  std::copy(signal.begin(), signal.end(), level[0].begin());
  for (int d = 0; d < depth; ++d) {
    std::vector<std::vector<double>> next(level.size() * 2);
    for (std::size_t f = 0; f < level.size(); ++f) {
      auto lo = analyze(level[f], kSym6Lowpass);
      auto hi = analyze(level[f], g);
      // The high-pass branch mirrors the spectrum, so odd nodes swap children.
      const bool odd = f % 2 == 1;
      next[2 * f] = odd ? std::move(hi) : std::move(lo);
      next[2 * f + 1] = odd ? std::move(lo) : std::move(hi);
    }
    level = std::move(next);
  }
  WptTree t;
  t.depth = depth;
  t.input_length = signal.size();
  t.leaves = std::move(level);
  return t;
}

std::vector<double> inverse_wpt(const WptTree& tree) {
  const auto g = sym6_highpass();
  std::vector<std::vector<double>> level = tree.leaves;
  if (level.size() != (std::size_t{1} << tree.depth)) throw Error("packet tree has wrong leaf count");
  for (int d = tree.depth - 1; d >= 0; --d) {
    std::vector<std::vector<double>> up(level.size() / 2);
    for (std::size_t f = 0; f < up.size(); ++f) {
      const bool odd = f % 2 == 1;
      const auto& lo = odd ? level[2 * f + 1] : level[2 * f];
      const auto& hi = odd ? level[2 * f] : level[2 * f + 1];
      std::vector<double> x(lo.size() * 2, 0.0);
      synthesize(lo, kSym6Lowpass, x);
      synthesize(hi, g, x);
      up[f] = std::move(x);
    }
    level = std::move(up);
  }
  level[0].resize(tree.input_length);
  return level[0];
}

double band_energy(const WptTree& tree, double f_lo, double f_hi, double rate) {
  if (!(rate > 0.0) || !(f_lo >= 0.0) || !(f_lo < f_hi) || f_hi > rate / 2.0)
    throw ValidationError("invalid band [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                          "] Hz at rate " + std::to_string(rate));
  const double width = rate / 2.0 / static_cast<double>(tree.leaves.size());
  double e = 0.0;
  for (std::size_t k = 0; k < tree.leaves.size(); ++k) {
    const double lo = static_cast<double>(k) * width, hi = lo + width;
    if (hi <= f_lo || lo >= f_hi) continue;
    for (double c : tree.leaves[k]) e += c * c;
  }
  return e;
}

std::vector<double> segment_energy(std::span<const double> audio, double rate,
                                   const std::vector<Segment>& segments, double f_lo,
                                   double f_hi, int depth) {
  const std::size_t block = std::size_t{1} << depth;
  const double dur = static_cast<double>(audio.size()) / rate;
  std::vector<double> out;
  out.reserve(segments.size());
  for (const auto& s : segments) {
    if (s.start < 0.0 || s.end < s.start || s.end > dur + 1e-6)
      throw ValidationError("segment [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                            "] outside audio of " + std::to_string(dur) + " s");
    const auto b = static_cast<std::size_t>(std::lround(s.start * rate));
    const auto e = std::min(audio.size(), static_cast<std::size_t>(std::lround(s.end * rate)));
    std::vector<double> buf(audio.begin() + static_cast<std::ptrdiff_t>(std::min(b, e)),
                            audio.begin() + static_cast<std::ptrdiff_t>(e));
    if (buf.size() < block) buf.resize(block, 0.0);
    out.push_back(band_energy(wpt(buf, depth), f_lo, f_hi, rate));
  }
  return out;
}

}  // namespace diarkit
