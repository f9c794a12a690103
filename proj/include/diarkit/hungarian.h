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

#include <vector>

#include "diarkit/common.h"

namespace diarkit {

// Row -> column assignment maximizing the summed score of a rectangular
// matrix. Each row and column is used at most once; rows left unassigned
// (when rows > cols) map to -1.
std::vector<int> max_weight_assignment(const RowMatrix& score);

}  // namespace diarkit
