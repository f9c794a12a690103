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

#include "diarkit/segments.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "diarkit/common.h"
#include "diarkit/io_util.h"

namespace diarkit {
namespace {

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<Segment> merge_intervals(std::vector<Segment> segs) {
  std::sort(segs.begin(), segs.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  std::vector<Segment> out;
  for (auto& s : segs) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back({s.start, s.end, {}});
    }
  }
  return out;
}

double total_duration(const std::vector<Segment>& segs) {
  double t = 0.0;
  for (const auto& s : segs) t += s.duration();
  return t;
}

std::vector<Segment> parse_segments(std::istream& in, const std::string& source) {
  std::vector<Segment> segs;
  std::string line;
  int lineno = 0;
  bool labeled = false;
  const auto fail = [&](const std::string& why) {
    return Error(source + ": " + why + " at line " + std::to_string(lineno));
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;

    Segment s;
    if (tok[0] == "SPEAKER") {
      if (tok.size() != 10) throw fail("RTTM SPEAKER record needs 10 fields");
      double dur = 0.0;
      if (!parse_double(tok[3], s.start) || !parse_double(tok[4], dur)) {
        throw fail("unparsable RTTM time");
      }
      if (dur < 0.0) throw fail("negative duration");
      s.end = s.start + dur;
      s.label = tok[7];
    } else if (is_rttm_record_type(tok[0])) {
      continue;
    } else {
      if (tok.size() < 2 || tok.size() > 3) throw fail("expected 'start end [label]'");
      if (!parse_double(tok[0], s.start) || !parse_double(tok[1], s.end)) {
        throw fail("unparsable number");
      }
      if (tok.size() == 3) s.label = tok[2];
    }
    if (s.start < 0.0) throw fail("negative start");
    if (s.end <= s.start) throw fail("end before start");
    labeled = labeled || !s.label.empty();
    segs.push_back(std::move(s));
  }

  if (!labeled) return merge_intervals(std::move(segs));
  std::stable_sort(segs.begin(), segs.end(),
                   [](const Segment& a, const Segment& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].start < segs[i - 1].end - 1e-9) {
      throw Error(source + ": overlapping segments at " + format_fixed(segs[i].start, 3) +
                  " s");
    }
  }
  return segs;
}

std::vector<Segment> read_segments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open segments file '" + path.string() + "'");
  return parse_segments(in, path.string());
}

void write_segments(const std::filesystem::path& path, const std::vector<Segment>& segs) {
  std::ostringstream os;
  for (const auto& s : segs) {
    os << format_fixed(s.start, 3) << ' ' << format_fixed(s.end, 3);
    if (!s.label.empty()) os << ' ' << s.label;
    os << '\n';
  }
  write_file_atomic(path, os.str());
}

}  // namespace diarkit
