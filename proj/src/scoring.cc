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

#include "diarkit/scoring.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "diarkit/common.h"
#include "diarkit/hungarian.h"
#include "diarkit/io_util.h"

namespace diarkit {
namespace {

std::vector<Segment> speech_only(const Hypothesis& h, const char* what) {
  std::vector<Segment> out;
  for (const auto& s : h) {
    if (s.label == kNonSpeechLabel) continue;
    if (s.label.empty()) throw ValidationError(std::string(what) + " segment without a label");
    if (!(s.end > s.start) || s.start < 0.0)
      throw ValidationError(std::string(what) + " segment with invalid times");
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Segment& a, const Segment& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].start < out[i - 1].end - 1e-9)
      throw ValidationError(std::string(what) + " has overlapping speech at " +
                            format_fixed(out[i].start, 3) + " s");
  return out;
}

// Index of the segment covering t, or -1.
int covering(const std::vector<Segment>& segs, double t) {
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double v, const Segment& s) { return v < s.start; });
  if (it == segs.begin()) return -1;
  --it;
  return t < it->end ? static_cast<int>(it - segs.begin()) : -1;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace

DerBreakdown score_der(const Hypothesis& reference, const Hypothesis& hypothesis,
                       double collar_sec) {
  if (!(collar_sec >= 0.0)) throw ValidationError("collar must be non-negative");
  const auto ref = speech_only(reference, "reference");
  const auto hyp = speech_only(hypothesis, "hypothesis");

  std::vector<Segment> excluded;
  if (collar_sec > 0.0) {
    for (const auto& s : ref) {
      excluded.push_back({std::max(0.0, s.start - collar_sec), s.start + collar_sec, {}});
      excluded.push_back({std::max(0.0, s.end - collar_sec), s.end + collar_sec, {}});
    }
    excluded = merge_intervals(std::move(excluded));
  }
  std::vector<double> cuts;
  for (const std::vector<Segment>* v : {&ref, &hyp, static_cast<const std::vector<Segment>*>(&excluded)})
    for (const auto& s : *v) {
      cuts.push_back(s.start);
      cuts.push_back(s.end);
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::string> ref_names, hyp_names;
  auto index_of = [](std::vector<std::string>& names, const std::string& l) {
    auto it = std::find(names.begin(), names.end(), l);
    if (it != names.end()) return static_cast<int>(it - names.begin());
    names.push_back(l);
    return static_cast<int>(names.size() - 1);
  };
  for (const auto& s : ref) index_of(ref_names, s.label);
  for (const auto& s : hyp) index_of(hyp_names, s.label);
  std::sort(ref_names.begin(), ref_names.end());
  std::sort(hyp_names.begin(), hyp_names.end());

  struct Piece {
    double dur;
    int r, h;
  };
  std::vector<Piece> pieces;
  RowMatrix overlap = RowMatrix::Zero(static_cast<Eigen::Index>(hyp_names.size()),
                                      static_cast<Eigen::Index>(ref_names.size()));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1], mid = 0.5 * (a + b);
    if (!(b > a) || covering(excluded, mid) >= 0) continue;
    const int ri = covering(ref, mid), hi = covering(hyp, mid);
    if (ri < 0 && hi < 0) continue;
    const int r = ri < 0 ? -1 : index_of(ref_names, ref[static_cast<std::size_t>(ri)].label);
    const int h = hi < 0 ? -1 : index_of(hyp_names, hyp[static_cast<std::size_t>(hi)].label);
    pieces.push_back({b - a, r, h});
    if (r >= 0 && h >= 0) overlap(h, r) += b - a;
  }

  DerBreakdown out;
  const auto assign = max_weight_assignment(overlap);
  for (std::size_t h = 0; h < assign.size(); ++h)
    if (assign[h] >= 0 && overlap(static_cast<Eigen::Index>(h), assign[h]) > 0.0)
      out.mapping[hyp_names[h]] = ref_names[static_cast<std::size_t>(assign[h])];
  for (const auto& p : pieces) {
    if (p.r >= 0) out.total_sec += p.dur;
    if (p.r < 0) {
      out.fa_sec += p.dur;
    } else if (p.h < 0) {
      out.miss_sec += p.dur;
    } else {
      auto it = out.mapping.find(hyp_names[static_cast<std::size_t>(p.h)]);
      if (it == out.mapping.end() || it->second != ref_names[static_cast<std::size_t>(p.r)])
        out.err_sec += p.dur;
    }
  }
  if (!(out.total_sec > 0.0)) throw ValidationError("reference contains no scored speech");
  out.der = (out.fa_sec + out.miss_sec + out.err_sec) / out.total_sec;
  return out;
}

std::string der_text(const DerBreakdown& b) {
  std::ostringstream os;
  os << "DER " << format_fixed(b.der, 4) << " (" << format_fixed(100.0 * b.der, 2) << "%)\n"
     << "  false alarm   " << format_fixed(b.fa_sec, 3) << " s\n"
     << "  missed speech " << format_fixed(b.miss_sec, 3) << " s\n"
     << "  speaker error " << format_fixed(b.err_sec, 3) << " s\n"
     << "  scored speech " << format_fixed(b.total_sec, 3) << " s\n";
  for (const auto& [h, r] : b.mapping) os << "  " << h << " -> " << r << '\n';
  return os.str();
}

std::string der_json(const DerBreakdown& b) {
  nlohmann::ordered_json j;
  j["fa"] = b.fa_sec;
  j["miss"] = b.miss_sec;
  j["err"] = b.err_sec;
  j["total"] = b.total_sec;
  j["der"] = b.der;
  j["mapping"] = b.mapping;
  return j.dump();
}

Hypothesis rttm_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open RTTM file '" + path.string() + "'");
  auto segs = parse_segments(in, path.string());
  for (auto& s : segs) {
    if (s.label.empty()) throw Error(path.string() + ": RTTM needs labeled SPEAKER records");
    s.start = round3(s.start);
    s.end = round3(s.end);
  }
  return segs;
}

std::string rttm_format(const Hypothesis& hyp, const std::string& file_id) {
  std::ostringstream os;
  for (const auto& s : hyp) {
    if (s.label == kNonSpeechLabel) continue;
    const double b = round3(s.start), e = round3(s.end);
    os << "SPEAKER " << file_id << " 1 " << format_fixed(b, 3) << ' ' << format_fixed(e - b, 3)
       << " <NA> <NA> " << s.label << " <NA> <NA>\n";
  }
  return os.str();
}

void rttm_write(const Hypothesis& hyp, const std::filesystem::path& path,
                const std::string& file_id) {
  write_file_atomic(path, rttm_format(hyp, file_id));
}

}  // namespace diarkit
