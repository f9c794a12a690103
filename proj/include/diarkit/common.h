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

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace diarkit {

// Runtime failure inside a module (bad file, divergence, degenerate data).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value is outside its documented range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using WarningSink = std::function<void(std::string_view)>;

// Installs a sink for non-fatal diagnostics and returns the previous one.
// The default sink writes "warning: <msg>" to stderr.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace diarkit
