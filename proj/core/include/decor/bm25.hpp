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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decor/corpus.hpp"
#include "decor/hit.hpp"

namespace decor {

// score(q, p) = sum over unique query terms t of
//   idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(p) / avg_len))
// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
//
// The +1 inside the logarithm keeps idf strictly positive, so any passage
// containing a query term scores > 0 and zero-score passages can be dropped
// without ordering ambiguity.

struct Bm25Params {
  double k1 = 1.2;  // term-frequency saturation, > 0
  double b = 0.75;  // length normalization, in [0, 1]
};

/// Immutable in-memory inverted index. Safe for concurrent search.
class Bm25Index {
 public:
  static Bm25Index build(const std::vector<Passage>& passages, Bm25Params params);

  // Top-n passages with score > 0, ranked by (score desc, passage_id asc).
  std::vector<ScoredHit> search(std::string_view query, int n) const;

  double idf(std::string_view term) const;
  std::uint64_t doc_frequency(std::string_view term) const;
  std::uint64_t collection_frequency(std::string_view term) const;  // sum of postings tf

  std::size_t num_passages() const { return doc_len_.size(); }
  std::size_t vocab_size() const { return terms_.size(); }
  double avg_len() const { return avg_len_; }
  const Bm25Params& params() const { return params_; }
  const std::string& passage_id(std::size_t ordinal) const { return ids_[ordinal]; }

  // On-disk format: one JSON header line, then passage lines, then one
  // postings line per term; checksum is FNV-1a over every byte after the
  // header line.
  void save(const std::string& path) const;
  static Bm25Index load(const std::string& path);

 private:
  Bm25Index() = default;

  struct Posting {
    std::uint32_t ordinal;
    std::uint32_t tf;
  };

  Bm25Params params_;
  std::unordered_map<std::string, std::uint32_t> vocabulary_;  // term -> term_id
  std::vector<std::string> terms_;                             // term_id -> term
  std::vector<std::vector<Posting>> postings_;                 // term_id -> postings
  std::vector<std::uint32_t> doc_len_;                         // ordinal -> token count
  std::vector<std::string> ids_;                               // ordinal -> passage_id
  double avg_len_ = 0.0;
};

}  // namespace decor
