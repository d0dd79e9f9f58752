/*
 * Copyright 2026 The decor authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>

namespace decor {

// One ranked retrieval result. Within a result list ranks are 1..k, scores
// are non-increasing, and equal scores are ordered by ascending passage_id.
struct ScoredHit {
  std::string passage_id;
  double score = 0.0;
  int rank = 0;
};

}  // namespace decor
