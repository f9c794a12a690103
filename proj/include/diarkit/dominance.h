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

#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "diarkit/segments.h"

namespace diarkit {

struct SpeakerSegmentFeatures {
  int segment_index = 0;
  std::string speaker;
  double turns = 0.0;
  double spts = 0.0;
  double spens = 0.0;
};

// Rows ordered by window, then speaker label; every speaker of the
// hypothesis gets a row in every window. `energies` holds one value per
// hypothesis segment. Segments straddling a window boundary are split pro
// rata and count one turn in each window they touch.
std::vector<SpeakerSegmentFeatures> extract_features(const Hypothesis& hyp,
                                                     const std::vector<double>& energies,
                                                     double session_duration,
                                                     double segment_len = 300.0);

struct CombVector {
  Eigen::VectorXd p;  // one per table row
  Eigen::Vector3d pca_axis;
  Eigen::Vector3d eigenvalues;  // descending
  Eigen::Vector3d mean;
  Eigen::Vector3d stddev;
};

// Population z-scores of (turns, spts, spens). Zero-variance dims map to 0.
Eigen::Matrix<double, Eigen::Dynamic, 3> zscore(const std::vector<SpeakerSegmentFeatures>& table,
                                               Eigen::Vector3d* mean = nullptr,
                                               Eigen::Vector3d* stddev = nullptr);

CombVector normalize_and_combine(const std::vector<SpeakerSegmentFeatures>& table);

// Softmax with max subtraction.
Eigen::VectorXd dominance_scores(const Eigen::VectorXd& p);

struct DominanceRow {
  SpeakerSegmentFeatures features;
  double comb = 0.0;
  double ds = 0.0;
};

struct DominanceReport {
  double segment_len = 300.0;
  std::vector<std::string> speakers;
  std::vector<DominanceRow> rows;
  Eigen::Vector3d pca_axis = Eigen::Vector3d::Zero();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();
};

// Features, session PCA and per-window softmax. With a single speaker
// every comb value is 0 and DS is 1.
DominanceReport dominance_report(const Hypothesis& hyp, const std::vector<double>& energies,
                                 double session_duration, double segment_len = 300.0);

std::string dominance_csv(const DominanceReport& report);

}  // namespace diarkit
