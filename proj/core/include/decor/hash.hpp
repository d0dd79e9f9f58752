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

#include <cstdint>
#include <string_view>

namespace decor {

inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

// FNV-1a over the raw bytes. Used for embedding-cache keys, transcript
// request keys, index checksums, and the hashed bag-of-words features.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = kFnvOffsetBasis) noexcept {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return h;
}

// Seeds for the three feature hashes of the mock encoder. Fixed forever:
// cached vectors and committed fixtures depend on them.
inline constexpr std::uint64_t kBowIndexSeed = kFnvOffsetBasis;
inline constexpr std::uint64_t kBowSignSeed = 0x9e3779b97f4a7c15ull;
inline constexpr std::uint64_t kBowExtraSeed = 0x517cc1b727220a95ull;

}  // namespace decor
