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

#include "diarkit/dominance.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "diarkit/common.h"
#include "diarkit/io_util.h"

namespace diarkit {

std::vector<SpeakerSegmentFeatures> extract_features(const Hypothesis& hyp,
                                                     const std::vector<double>& energies,
                                                     double session_duration,
                                                     double segment_len) {
  if (hyp.empty()) throw ValidationError("empty hypothesis");
  if (energies.size() != hyp.size()) throw ValidationError("need one energy per hypothesis segment");
  if (!(segment_len > 0.0)) throw ValidationError("segment length must be positive");
  std::set<std::string> speakers;
  double end = session_duration;
  for (const auto& s : hyp) {
    if (s.label == kNonSpeechLabel) continue;
    speakers.insert(s.label);
    end = std::max(end, s.end);
  }
  if (speakers.empty()) throw ValidationError("hypothesis has no speaker segments");
  if (!(end > 0.0)) throw ValidationError("session duration must be positive");
  const int windows = std::max(1, static_cast<int>(std::ceil(end / segment_len - 1e-9)));
  std::map<std::string, std::size_t> col;
  for (const auto& s : speakers) col.emplace(s, col.size());
  std::vector<SpeakerSegmentFeatures> rows(static_cast<std::size_t>(windows) * speakers.size());
  for (int w = 0; w < windows; ++w)
    for (const auto& [name, c] : col) {
      auto& r = rows[static_cast<std::size_t>(w) * speakers.size() + c];
      r.segment_index = w;
      r.speaker = name;
    }
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    const auto& s = hyp[i];
    if (s.label == kNonSpeechLabel || !(s.end > s.start)) continue;
    const int w0 = std::clamp(static_cast<int>(std::floor(s.start / segment_len)), 0, windows - 1);
    const int w1 = std::clamp(static_cast<int>(std::ceil(s.end / segment_len)) - 1, w0, windows - 1);
    for (int w = w0; w <= w1; ++w) {
      const double lo = std::max(s.start, w * segment_len);
      const double hi = w == windows - 1 ? s.end : std::min(s.end, (w + 1) * segment_len);
      if (!(hi > lo)) continue;
      auto& r = rows[static_cast<std::size_t>(w) * speakers.size() + col.at(s.label)];
      r.turns += 1.0;
      r.spts += hi - lo;
      r.spens += energies[i] * (hi - lo) / s.duration();
    }
  }
  return rows;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> zscore(const std::vector<SpeakerSegmentFeatures>& table,
                                               Eigen::Vector3d* mean, Eigen::Vector3d* stddev) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> z(static_cast<Eigen::Index>(table.size()), 3);
  for (std::size_t i = 0; i < table.size(); ++i)
    z.row(static_cast<Eigen::Index>(i)) << table[i].turns, table[i].spts, table[i].spens;
  const Eigen::Vector3d mu = z.colwise().mean().transpose();
  z.rowwise() -= mu.transpose();
  Eigen::Vector3d sd = (z.array().square().colwise().sum() / static_cast<double>(z.rows())).sqrt().transpose();
  for (int d = 0; d < 3; ++d) {
    if (sd(d) > 1e-12 * std::max(1.0, std::abs(mu(d))))
      z.col(d) /= sd(d);
    else
      z.col(d).setZero();
  }
  if (mean) *mean = mu;
  if (stddev) *stddev = sd;
  return z;
}

CombVector normalize_and_combine(const std::vector<SpeakerSegmentFeatures>& table) {
  if (table.size() < 2) throw ValidationError("need at least 2 (speaker, segment) rows");
  CombVector out;
  const auto z = zscore(table, &out.mean, &out.stddev);
  const Eigen::Matrix3d cov = z.transpose() * z / static_cast<double>(z.rows());
  if (cov.cwiseAbs().maxCoeff() < 1e-12) throw Error("degenerate session: all rows identical");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // Eigen sorts ascending.
  for (int i = 0; i < 3; ++i) out.eigenvalues(i) = std::max(0.0, es.eigenvalues()(2 - i));
  Eigen::Vector3d axis = es.eigenvectors().col(2).normalized();
  const double s = std::abs(axis(1)) > 1e-12 ? axis(1) : axis(0);
  if (s < 0.0) axis = -axis;
  out.pca_axis = axis;
  out.p = z * axis;
  return out;
}

Eigen::VectorXd dominance_scores(const Eigen::VectorXd& p) {
  if (p.size() == 0) return p;
  if (!p.allFinite()) throw ValidationError("comb values must be finite");
  Eigen::VectorXd e = (p.array() - p.maxCoeff()).exp();
  return e / e.sum();
}

DominanceReport dominance_report(const Hypothesis& hyp, const std::vector<double>& energies,
                                 double session_duration, double segment_len) {
  DominanceReport rep;
  rep.segment_len = segment_len;
  const auto table = extract_features(hyp, energies, session_duration, segment_len);
  std::set<std::string> names;
  for (const auto& r : table) names.insert(r.speaker);
  rep.speakers.assign(names.begin(), names.end());
  const std::size_t n = rep.speakers.size();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.size()));
  if (n > 1) {
    const auto comb = normalize_and_combine(table);
    p = comb.p;
    rep.pca_axis = comb.pca_axis;
    rep.eigenvalues = comb.eigenvalues;
  }
  rep.rows.resize(table.size());
  for (std::size_t w = 0; w * n < table.size(); ++w) {
    const auto seg = p.segment(static_cast<Eigen::Index>(w * n), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd ds = dominance_scores(seg);
    for (std::size_t i = 0; i < n; ++i) {
      auto& row = rep.rows[w * n + i];
      row.features = table[w * n + i];
      row.comb = seg(static_cast<Eigen::Index>(i));
      row.ds = ds(static_cast<Eigen::Index>(i));
    }
  }
  return rep;
}

std::string dominance_csv(const DominanceReport& report) {
  std::ostringstream os;
  os << "segment,speaker,turns,spts,spens,comb,ds\n";
  for (const auto& r : report.rows)
    os << r.features.segment_index << ',' << r.features.speaker << ','
       << format_general(r.features.turns, 6) << ',' << format_general(r.features.spts, 6) << ','
       << format_general(r.features.spens, 6) << ',' << format_general(r.comb, 6) << ','
       << format_general(r.ds, 6) << '\n';
  return os.str();
}

}  // namespace diarkit
