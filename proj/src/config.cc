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

#include "diarkit/config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "diarkit/common.h"
#include "diarkit/io_util.h"

namespace diarkit {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const char* first = v.data();
  const char* last = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || v.empty())
    throw ValidationError("config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::string num(double v) { return format_general(v, 10); }

}  // namespace

void PipelineConfig::validate() const {
  if (sample_rate < 1000) throw ValidationError("sample rate must be at least 1000 Hz");
  if (mfcc.window < 2 || mfcc.hop < 1 || mfcc.fft_size < mfcc.window)
    throw ValidationError("invalid MFCC framing");
  if (mfcc.num_filters < 2 || mfcc.num_ceps < 1 || mfcc.num_ceps > mfcc.num_filters)
    throw ValidationError("invalid MFCC filterbank/cepstra sizes");
  if (splice_left < 0 || splice_right < 0) throw ValidationError("splice context must be >= 0");
  dae.validate();
  diarizer.validate();
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  std::string hidden;
  for (std::size_t i = 0; i < dae.hidden_dims.size(); ++i)
    hidden += (i ? "," : "") + std::to_string(dae.hidden_dims[i]);
  return {
      {"sample_rate", std::to_string(sample_rate)},
      {"mfcc.preemphasis", num(mfcc.preemphasis)},
      {"mfcc.window", std::to_string(mfcc.window)},
      {"mfcc.hop", std::to_string(mfcc.hop)},
      {"mfcc.fft_size", std::to_string(mfcc.fft_size)},
      {"mfcc.filters", std::to_string(mfcc.num_filters)},
      {"mfcc.ceps", std::to_string(mfcc.num_ceps)},
      {"splice.left", std::to_string(splice_left)},
      {"splice.right", std::to_string(splice_right)},
      {"features", features == FeatureKind::kBnf ? "bnf" : "mfcc91"},
      {"dae.hidden", hidden},
      {"dae.corruption", num(dae.corruption_level)},
      {"dae.corruption_kind",
       dae.corruption_kind == dae::CorruptionKind::kMasking ? "masking" : "additive"},
      {"dae.lr", num(dae.learning_rate)},
      {"dae.momentum", num(dae.momentum)},
      {"dae.epochs", std::to_string(dae.epochs)},
      {"dae.batch", std::to_string(dae.batch_size)},
      {"mode", diarizer.no_sad_mode ? "no-sad" : "oracle-sad"},
      {"speakers", std::to_string(diarizer.n_speakers)},
      {"initial_states", std::to_string(diarizer.initial_states)},
      {"min_dur", num(diarizer.min_duration_sec)},
      {"components", std::to_string(diarizer.components_per_segment)},
      {"self_loop", num(diarizer.self_loop_prob)},
      {"max_outer_iters", std::to_string(diarizer.max_outer_iters)},
      {"segmental_em_iters", std::to_string(diarizer.segmental_em_iters)},
      {"merge_em_iters", std::to_string(diarizer.merge_em_iters)},
      {"refit_em_iters", std::to_string(diarizer.refit_em_iters)},
      {"seed", std::to_string(seed)},
  };
}

void PipelineConfig::set(const std::string& key, const std::string& v) {
  if (key == "sample_rate") sample_rate = parse_number<int>(key, v);
  else if (key == "mfcc.preemphasis") mfcc.preemphasis = parse_number<double>(key, v);
  else if (key == "mfcc.window") mfcc.window = parse_number<int>(key, v);
  else if (key == "mfcc.hop") mfcc.hop = parse_number<int>(key, v);
  else if (key == "mfcc.fft_size") mfcc.fft_size = parse_number<int>(key, v);
  else if (key == "mfcc.filters") mfcc.num_filters = parse_number<int>(key, v);
  else if (key == "mfcc.ceps") mfcc.num_ceps = parse_number<int>(key, v);
  else if (key == "splice.left") splice_left = parse_number<int>(key, v);
  else if (key == "splice.right") splice_right = parse_number<int>(key, v);
  else if (key == "features") {
    if (v == "bnf") features = FeatureKind::kBnf;
    else if (v == "mfcc91") features = FeatureKind::kMfcc91;
    else throw ValidationError("config key 'features': expected bnf or mfcc91, got '" + v + "'");
  } else if (key == "dae.hidden") {
    std::vector<int> dims;
    std::istringstream is(v);
    for (std::string tok; std::getline(is, tok, ',');) dims.push_back(parse_number<int>(key, trim(tok)));
    dae.hidden_dims = dims;
  } else if (key == "dae.corruption") dae.corruption_level = parse_number<double>(key, v);
  else if (key == "dae.corruption_kind") {
    if (v == "additive") dae.corruption_kind = dae::CorruptionKind::kAdditiveGaussian;
    else if (v == "masking") dae.corruption_kind = dae::CorruptionKind::kMasking;
    else throw ValidationError("config key 'dae.corruption_kind': expected additive or masking");
  } else if (key == "dae.lr") dae.learning_rate = parse_number<double>(key, v);
  else if (key == "dae.momentum") dae.momentum = parse_number<double>(key, v);
  else if (key == "dae.epochs") dae.epochs = parse_number<int>(key, v);
  else if (key == "dae.batch") dae.batch_size = parse_number<int>(key, v);
  else if (key == "mode") {
    if (v == "oracle-sad") diarizer.no_sad_mode = false;
    else if (v == "no-sad") diarizer.no_sad_mode = true;
    else throw ValidationError("config key 'mode': expected oracle-sad or no-sad, got '" + v + "'");
  } else if (key == "no_sad") diarizer.no_sad_mode = parse_bool(key, v);
  else if (key == "speakers") diarizer.n_speakers = parse_number<int>(key, v);
  else if (key == "initial_states") diarizer.initial_states = parse_number<int>(key, v);
  else if (key == "min_dur") diarizer.min_duration_sec = parse_number<double>(key, v);
  else if (key == "components") diarizer.components_per_segment = parse_number<int>(key, v);
  else if (key == "self_loop") diarizer.self_loop_prob = parse_number<double>(key, v);
  else if (key == "max_outer_iters") diarizer.max_outer_iters = parse_number<int>(key, v);
  else if (key == "segmental_em_iters") diarizer.segmental_em_iters = parse_number<int>(key, v);
  else if (key == "merge_em_iters") diarizer.merge_em_iters = parse_number<int>(key, v);
  else if (key == "refit_em_iters") diarizer.refit_em_iters = parse_number<int>(key, v);
  else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, v);
    diarizer.seed = seed;
  } else throw ValidationError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text,
                                                                  const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(source + ": expected 'key = value' at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(source + ": empty key at line " + std::to_string(lineno));
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

void apply_config_file(PipelineConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  for (const auto& [k, v] : parse_key_values(ss.str(), path.string())) {
    try {
      cfg.set(k, v);
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
}

}  // namespace diarkit
