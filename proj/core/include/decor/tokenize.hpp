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
#include <string_view>
#include <vector>

namespace decor {

// Lowercases and splits on every non-alphanumeric byte (ASCII). No stemming,
// no stopwords. Shared by the BM25 index and the mock encoder so that the
// sparse and dense toy paths see identical vocabularies.
std::vector<std::string> tokenize(std::string_view text);

// Lowercase, punctuation to spaces, whitespace collapsed, trimmed. The
// canonical form used when matching evidence facts against passage text.
std::string normalize_for_match(std::string_view text);

// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view text);

}  // namespace decor
