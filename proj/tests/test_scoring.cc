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

#include <fstream>
#include <random>

#include <json.hpp>

#include "diarkit/hungarian.h"
#include "diarkit/scoring.h"
#include "test_util.h"

using namespace diarkit;

namespace {

Hypothesis random_labeling(std::mt19937_64& rng, int speakers, double gap_prob) {
  Hypothesis h;
  double t = 0.0;
  std::uniform_real_distribution<double> len(0.3, 4.0), u(0.0, 1.0);
  std::uniform_int_distribution<int> who(0, speakers - 1);
  while (t < 60.0) {
    const double d = len(rng);
    if (u(rng) >= gap_prob) h.push_back({t, t + d, "r" + std::to_string(who(rng))});
    t += d;
  }
  return h;
}

std::filesystem::path write_text(const std::string& name, const std::string& text) {
  const auto p = testing::scratch_dir("scoring") / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("max_weight_assignment") {
  RowMatrix s(3, 3);
  s << 1, 2, 3, 2, 4, 6, 3, 6, 9;
  const auto a = max_weight_assignment(s);
  double tot = 0.0;
  for (int i = 0; i < 3; ++i) tot += s(i, a[static_cast<std::size_t>(i)]);
  CHECK(tot == 14.0);
  RowMatrix w = testing::random_matrix(4, 6, 3).cwiseAbs();
  const auto b = max_weight_assignment(w);
  std::vector<int> cols = {0, 1, 2, 3, 4, 5};
  double best = -1.0;
  do {
    double v = 0.0;
    for (int i = 0; i < 4; ++i) v += w(i, cols[static_cast<std::size_t>(i)]);
    best = std::max(best, v);
  } while (std::next_permutation(cols.begin(), cols.end()));
  double got = 0.0;
  for (int i = 0; i < 4; ++i) got += w(i, b[static_cast<std::size_t>(i)]);
  CHECK(got == doctest::Approx(best).epsilon(1e-12));
  RowMatrix tall = w.transpose();
  const auto c = max_weight_assignment(tall);
  int assigned = 0;
  for (int j : c) assigned += j >= 0;
  CHECK(assigned == 4);
}

TEST_CASE("DER examples") {
  const Hypothesis ref = {{0, 10, "A"}, {10, 20, "B"}};
  const auto same = score_der(ref, ref);
  CHECK(same.der == 0.0);
  CHECK(der_text(same).find("DER 0.0000") != std::string::npos);

  const auto merged = score_der(ref, {{0, 20, "x"}});
  CHECK(merged.der == doctest::Approx(0.5));
  CHECK(merged.err_sec == doctest::Approx(10.0));

  const auto hand = score_der(ref, {{0, 12, "spk1"}, {12, 20, "spk2"}});
  CHECK(hand.err_sec == doctest::Approx(2.0));
  CHECK(hand.fa_sec == 0.0);
  CHECK(hand.miss_sec == 0.0);
  CHECK(hand.total_sec == 20.0);
  CHECK(hand.der == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(hand.mapping.at("spk1") == "A");
  CHECK(hand.mapping.at("spk2") == "B");
  CHECK(der_text(hand).find("DER 0.1000") != std::string::npos);
  const auto j = nlohmann::json::parse(der_json(hand));
  CHECK(j["der"].get<double>() == doctest::Approx(0.1));

  const auto fm = score_der(ref, {{5, 25, "A"}});
  CHECK(fm.miss_sec == doctest::Approx(5.0));
  CHECK(fm.fa_sec == doctest::Approx(5.0));
  CHECK(fm.err_sec == doctest::Approx(5.0));
  CHECK(fm.mapping.at("A") == "B");

  CHECK_THROWS_AS(score_der({}, ref), ValidationError);
  CHECK_THROWS_AS(score_der({{0, 5, "A"}, {4, 6, "B"}}, ref), ValidationError);
  CHECK_THROWS_AS(score_der(ref, ref, -1.0), ValidationError);
}

TEST_CASE("DER properties on random timelines") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const Hypothesis ref = random_labeling(rng, 3, 0.2);
    if (ref.empty()) continue;
    const Hypothesis hyp = random_labeling(rng, 4, 0.3);

    Hypothesis renamed = ref;
    for (auto& s : renamed) s.label = "h_" + s.label + "_x";
    CHECK(score_der(ref, renamed).der == 0.0);

    Hypothesis perm = hyp;
    for (auto& s : perm) s.label = s.label == "r0" ? "r3" : s.label == "r3" ? "r0" : "q" + s.label;
    const auto a = score_der(ref, hyp), b = score_der(ref, perm);
    CHECK(a.der == doctest::Approx(b.der).epsilon(1e-12));

    // additivity over refinement: splitting hyp segments changes nothing
    Hypothesis split;
    for (const auto& s : hyp) {
      const double m = 0.5 * (s.start + s.end);
      split.push_back({s.start, m, s.label});
      split.push_back({m, s.end, s.label});
    }
    const auto c = score_der(ref, split);
    CHECK(c.fa_sec == doctest::Approx(a.fa_sec).epsilon(1e-9));
    CHECK(c.miss_sec == doctest::Approx(a.miss_sec).epsilon(1e-9));
    CHECK(c.err_sec == doctest::Approx(a.err_sec).epsilon(1e-9));
    CHECK(a.der == doctest::Approx((a.fa_sec + a.miss_sec + a.err_sec) / a.total_sec));

    double prev_total = a.total_sec + 1e-9, prev_fa = 1e300, prev_miss = 1e300, prev_err = 1e300;
    for (double collar : {0.0, 0.1, 0.25, 0.5}) {
      const auto d = score_der(ref, hyp, collar);
      CHECK(d.total_sec <= prev_total + 1e-9);
      CHECK(d.fa_sec <= prev_fa + 1e-9);
      CHECK(d.miss_sec <= prev_miss + 1e-9);
      CHECK(d.err_sec <= prev_err + 1e-9);
      prev_total = d.total_sec;
      prev_fa = d.fa_sec;
      prev_miss = d.miss_sec;
      prev_err = d.err_sec;
    }
  }
}

TEST_CASE("RTTM read and write") {
  const auto p = write_text("one.rttm", "SPKR-INFO s1 1 <NA> <NA> <NA> unknown spk0 <NA> <NA>\n"
                                        "SPEAKER s1 1 0.500 2.000 <NA> <NA> spk0 <NA> <NA>\n");
  const auto h = rttm_read(p);
  REQUIRE(h.size() == 1);
  CHECK(h[0] == Segment{0.5, 2.5, "spk0"});

  const Hypothesis hyp = {{0.0004, 1.2346, "a"}, {1.2346, 3.0, "b"}, {3.0, 3.5, "NS"}, {4.1, 9.87654, "a"}};
  const auto q = testing::scratch_dir("scoring") / "rt.rttm";
  rttm_write(hyp, q, "sess");
  const auto back = rttm_read(q);
  REQUIRE(back.size() == 3);
  CHECK(back[0] == Segment{0.0, 1.235, "a"});
  CHECK(back[1] == Segment{1.235, 3.0, "b"});
  CHECK(back[2] == Segment{4.1, 9.877, "a"});
  CHECK(rttm_format(back, "sess") == rttm_format(hyp, "sess"));

  const auto bad = write_text("bad.rttm", "SPEAKER s1 1 0.0 1.0 <NA> <NA> a <NA> <NA>\n"
                                          "SPEAKER s1 1 1.0 1.0 <NA> <NA> a <NA>\n");
  try {
    rttm_read(bad);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  const auto neg = write_text("neg.rttm", "SPEAKER s1 1 1.0 -1.0 <NA> <NA> a <NA> <NA>\n");
  CHECK_THROWS_AS(rttm_read(neg), Error);
  CHECK_THROWS_AS(rttm_read(testing::scratch_dir("scoring") / "missing.rttm"), Error);

  const auto ov = write_text("ov.rttm", "SPEAKER s1 1 0.0 2.0 <NA> <NA> a <NA> <NA>\n"
                                        "SPEAKER s1 1 1.0 2.0 <NA> <NA> b <NA> <NA>\n");
  CHECK_THROWS_AS(rttm_read(ov), Error);
}
