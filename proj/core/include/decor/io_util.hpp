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

#include <functional>
#include <string>
#include <string_view>

namespace decor {

// Whole-file read; throws Error(Io) when the path cannot be opened.
std::string read_file(const std::string& path);

// Atomic-enough write: truncates and writes the full buffer, throws Error(Io)
// on failure.
void write_file(const std::string& path, std::string_view content);

bool file_exists(const std::string& path);

// Invokes fn for every non-empty line with a 1-based line number.
void for_each_line(const std::string& path,
                   const std::function<void(std::string_view, std::size_t)>& fn);

}  // namespace decor
