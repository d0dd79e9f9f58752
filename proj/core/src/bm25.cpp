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

#include "decor/bm25.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/hash.hpp"
#include "decor/io_util.hpp"
#include "decor/tokenize.hpp"

namespace decor {

using nlohmann::json;

namespace {
constexpr int kIndexFormatVersion = 1;

double idf_value(std::size_t n_docs, std::uint64_t df) {
  return std::log(1.0 + (static_cast<double>(n_docs) - static_cast<double>(df) + 0.5) /
                            (static_cast<double>(df) + 0.5));
}
}  // namespace

Bm25Index Bm25Index::build(const std::vector<Passage>& passages, Bm25Params params) {
  if (passages.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "cannot build BM25 index over zero passages");
  }
  if (!(params.k1 > 0.0) || params.b < 0.0 || params.b > 1.0) {
    throw Error(ErrorKind::InvalidConfig, "BM25 requires k1 > 0 and b in [0, 1]");
  }

  Bm25Index index;
  index.params_ = params;
  index.ids_.reserve(passages.size());
  index.doc_len_.reserve(passages.size());

  std::uint64_t total_len = 0;
  for (std::size_t ordinal = 0; ordinal < passages.size(); ++ordinal) {
    const std::vector<std::string> tokens = tokenize(passages[ordinal].text);
    index.ids_.push_back(passages[ordinal].passage_id);
    index.doc_len_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total_len += tokens.size();

    // Term frequencies within this passage; term ids assigned on first sight
    // so the build is deterministic for a fixed passage order.
    std::unordered_map<std::uint32_t, std::uint32_t> tf;
    for (const std::string& token : tokens) {
      auto [it, inserted] =
          index.vocabulary_.try_emplace(token, static_cast<std::uint32_t>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(token);
        index.postings_.emplace_back();
      }
      ++tf[it->second];
    }
    for (const auto& [term_id, count] : tf) {
      index.postings_[term_id].push_back({static_cast<std::uint32_t>(ordinal), count});
    }
  }
  // Postings are appended in ascending ordinal order per term already; the
  // per-passage map makes insertion order unspecified, so sort to be sure.
  for (auto& postings : index.postings_) {
    std::sort(postings.begin(), postings.end(),
              [](const Posting& a, const Posting& b) { return a.ordinal < b.ordinal; });
  }
  index.avg_len_ = static_cast<double>(total_len) / static_cast<double>(passages.size());
  return index;
}

double Bm25Index::idf(std::string_view term) const {
  return idf_value(num_passages(), doc_frequency(term));
}

std::uint64_t Bm25Index::doc_frequency(std::string_view term) const {
  auto it = vocabulary_.find(std::string(term));
  return it == vocabulary_.end() ? 0 : postings_[it->second].size();
}

std::uint64_t Bm25Index::collection_frequency(std::string_view term) const {
  auto it = vocabulary_.find(std::string(term));
  if (it == vocabulary_.end()) return 0;
  std::uint64_t total = 0;
  for (const Posting& posting : postings_[it->second]) total += posting.tf;
  return total;
}

std::vector<ScoredHit> Bm25Index::search(std::string_view query, int n) const {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "bm25 search requires n >= 1");

  // Unique query terms, first-appearance order. The scoring formula carries
  // no query-side term frequency.
  std::vector<std::string> terms = tokenize(query);
  std::vector<std::string> unique;
  for (std::string& t : terms) {
    if (std::find(unique.begin(), unique.end(), t) == unique.end()) unique.push_back(std::move(t));
  }

  std::vector<double> scores(doc_len_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const std::string& term : unique) {
    auto it = vocabulary_.find(term);
    if (it == vocabulary_.end()) continue;
    const auto& postings = postings_[it->second];
    const double w_idf = idf_value(num_passages(), postings.size());
    for (const Posting& posting : postings) {
      const double tf = static_cast<double>(posting.tf);
      const double norm =
          params_.k1 * (1.0 - params_.b + params_.b * doc_len_[posting.ordinal] / avg_len_);
      if (scores[posting.ordinal] == 0.0) touched.push_back(posting.ordinal);
      scores[posting.ordinal] += w_idf * tf * (params_.k1 + 1.0) / (tf + norm);
    }
  }

  std::sort(touched.begin(), touched.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  });
  if (touched.size() > static_cast<std::size_t>(n)) touched.resize(static_cast<std::size_t>(n));

  std::vector<ScoredHit> hits;
  hits.reserve(touched.size());
  for (std::uint32_t ordinal : touched) {
    hits.push_back({ids_[ordinal], scores[ordinal], static_cast<int>(hits.size() + 1)});
  }
  return hits;
}

void Bm25Index::save(const std::string& path) const {
  std::string body;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    json row = {{"p", ids_[i]}, {"len", doc_len_[i]}};
    body += row.dump();
    body.push_back('\n');
  }
  for (std::size_t term_id = 0; term_id < terms_.size(); ++term_id) {
    json postings = json::array();
    for (const Posting& posting : postings_[term_id]) {
      postings.push_back({posting.ordinal, posting.tf});
    }
    json row = {{"t", terms_[term_id]}, {"l", std::move(postings)}};
    body += row.dump();
    body.push_back('\n');
  }

  json header = {{"format_version", kIndexFormatVersion},
                 {"k1", params_.k1},
                 {"b", params_.b},
                 {"N", ids_.size()},
                 {"avg_len", avg_len_},
                 {"num_terms", terms_.size()},
                 {"checksum", fnv1a64(body)}};
  write_file(path, header.dump() + "\n" + body);
}

Bm25Index Bm25Index::load(const std::string& path) {
  const std::string blob = read_file(path);
  const auto newline = blob.find('\n');
  if (newline == std::string::npos) {
    throw Error(ErrorKind::Corrupt, "bm25 index '" + path + "': missing header line");
  }
  json header = json::parse(blob.substr(0, newline), nullptr, false);
  if (header.is_discarded() || !header.is_object() || !header.contains("format_version")) {
    throw Error(ErrorKind::Corrupt, "bm25 index '" + path + "': unreadable header");
  }
  if (header["format_version"].get<int>() != kIndexFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "bm25 index format_version " +
                                                header["format_version"].dump() + ", expected " +
                                                std::to_string(kIndexFormatVersion));
  }
  const std::string body = blob.substr(newline + 1);
  if (fnv1a64(body) != header.at("checksum").get<std::uint64_t>()) {
    throw Error(ErrorKind::Corrupt, "bm25 index '" + path + "': checksum mismatch");
  }

  Bm25Index index;
  index.params_.k1 = header.at("k1").get<double>();
  index.params_.b = header.at("b").get<double>();
  index.avg_len_ = header.at("avg_len").get<double>();
  const std::size_t n_passages = header.at("N").get<std::size_t>();
  const std::size_t n_terms = header.at("num_terms").get<std::size_t>();

  std::size_t pos = 0, row_no = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    json row = json::parse(body.substr(pos, end - pos), nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::Corrupt, "bm25 index '" + path + "': bad row " +
                                          std::to_string(row_no + 1));
    }
    if (row_no < n_passages) {
      index.ids_.push_back(row.at("p").get<std::string>());
      index.doc_len_.push_back(row.at("len").get<std::uint32_t>());
    } else {
      std::vector<Posting> postings;
      for (const json& pair : row.at("l")) {
        postings.push_back({pair.at(0).get<std::uint32_t>(), pair.at(1).get<std::uint32_t>()});
      }
      index.vocabulary_.emplace(row.at("t").get<std::string>(),
                                static_cast<std::uint32_t>(index.terms_.size()));
      index.terms_.push_back(row.at("t").get<std::string>());
      index.postings_.push_back(std::move(postings));
    }
    ++row_no;
    pos = end + 1;
  }
  if (index.ids_.size() != n_passages || index.terms_.size() != n_terms) {
    throw Error(ErrorKind::Corrupt, "bm25 index '" + path + "': row counts disagree with header");
  }
  return index;
}

}  // namespace decor
