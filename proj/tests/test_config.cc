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

#include "diarkit/config.h"
#include "test_util.h"

using namespace diarkit;

TEST_CASE("defaults validate and round trip through entries") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.diarizer.n_speakers == 4);
  CHECK(cfg.diarizer.initial_states == 12);
  CHECK(cfg.diarizer.components_per_segment == 2);

  PipelineConfig changed;
  changed.set("speakers", "3");
  changed.set("dae.hidden", "200,50,200");
  changed.set("mode", "no-sad");
  changed.set("seed", "99");
  changed.set("features", "mfcc91");
  PipelineConfig copy;
  for (const auto& [k, v] : changed.entries()) copy.set(k, v);
  CHECK(copy.entries() == changed.entries());
  CHECK(copy.diarizer.no_sad_mode);
  CHECK(copy.diarizer.seed == 99);
  CHECK(copy.seed == 99);
  CHECK(copy.features == FeatureKind::kMfcc91);
}

TEST_CASE("set rejects unknown keys and bad values") {
  PipelineConfig cfg;
  CHECK_THROWS_AS(cfg.set("no.such.key", "1"), ValidationError);
  CHECK_THROWS_AS(cfg.set("speakers", "four"), ValidationError);
  CHECK_THROWS_AS(cfg.set("self_loop", "0.9x"), ValidationError);
  CHECK_THROWS_AS(cfg.set("no_sad", "maybe"), ValidationError);
  CHECK_THROWS_AS(cfg.set("features", "plp"), ValidationError);
  CHECK_THROWS_AS(cfg.set("dae.corruption_kind", "dropout"), ValidationError);
}

TEST_CASE("key/value files") {
  const auto kv = parse_key_values("# comment\n speakers = 2\n\nmin_dur=1.0  # trailing\n", "t");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"speakers", "2"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"min_dur", "1.0"});
  try {
    parse_key_values("a = 1\nnonsense\n", "file.cfg");
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  const auto dir = testing::scratch_dir("config");
  std::ofstream(dir / "ok.cfg") << "speakers = 2\nmin_dur = 1.0\ndae.epochs = 3\n";
  PipelineConfig cfg;
  apply_config_file(cfg, dir / "ok.cfg");
  CHECK(cfg.diarizer.n_speakers == 2);
  CHECK(cfg.diarizer.min_duration_sec == 1.0);
  CHECK(cfg.dae.epochs == 3);

  std::ofstream(dir / "bad.cfg") << "speakers = 2\ncolour = red\n";
  try {
    apply_config_file(cfg, dir / "bad.cfg");
    FAIL("expected error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_file(cfg, dir / "missing.cfg"), ValidationError);
}
