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

#include <doctest.h>

#include "decor/hash.hpp"
#include "decor/tokenize.hpp"

using namespace decor;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("The Painter's Studio") ==
        std::vector<std::string>{"the", "painter", "s", "studio"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("GPT-4o (2024)!") == std::vector<std::string>{"gpt", "4o", "2024"});
  CHECK(tokenize("   \t\n ") == std::vector<std::string>{});
  CHECK(tokenize("a--b__c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("fnv1a64 matches the reference test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("hello") == 0xa430d84680aabd0bull);
}

TEST_CASE("fnv1a64 seeds produce distinct streams") {
  CHECK(fnv1a64("cat", kBowIndexSeed) != fnv1a64("cat", kBowSignSeed));
  CHECK(fnv1a64("cat", kBowIndexSeed) != fnv1a64("cat", kBowExtraSeed));
  CHECK(fnv1a64("cat", kBowSignSeed) != fnv1a64("cat", kBowExtraSeed));
}

TEST_CASE("normalize_for_match lowercases and strips punctuation") {
  CHECK(normalize_for_match("Paris is the capital.") == "paris is the capital");
  CHECK(normalize_for_match("  A,B;;C  ") == "a b c");
  CHECK(normalize_for_match("") == "");
  CHECK(normalize_for_match("?!.") == "");
}

TEST_CASE("normalize_whitespace collapses runs and trims") {
  CHECK(normalize_whitespace("  a\t b\n\nc ") == "a b c");
  CHECK(normalize_whitespace("abc") == "abc");
  CHECK(normalize_whitespace(" \n ") == "");
}
