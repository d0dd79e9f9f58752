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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "decor/bm25.hpp"
#include "decor/errors.hpp"
#include "decor/io_util.hpp"
#include "decor/tokenize.hpp"

using namespace decor;

namespace {

// Exhaustive reference scorer: recomputes term frequencies by scanning every
// passage directly, with no inverted index involved.
std::vector<ScoredHit> brute_force_search(const std::vector<Passage>& passages,
                                          const std::string& query, int n, Bm25Params params) {
  const std::size_t n_docs = passages.size();
  std::vector<std::vector<std::string>> passage_tokens;
  passage_tokens.reserve(n_docs);
  double total_len = 0.0;
  for (const Passage& p : passages) {
    passage_tokens.push_back(tokenize(p.text));
    total_len += static_cast<double>(passage_tokens.back().size());
  }
  const double avg_len = total_len / static_cast<double>(n_docs);

  std::vector<std::string> unique_terms;
  for (const std::string& t : tokenize(query)) {
    if (std::find(unique_terms.begin(), unique_terms.end(), t) == unique_terms.end()) {
      unique_terms.push_back(t);
    }
  }

  std::vector<std::pair<double, std::string>> scored;
  for (std::size_t i = 0; i < n_docs; ++i) {
    double score = 0.0;
    for (const std::string& term : unique_terms) {
      std::size_t df = 0;
      for (const auto& tokens : passage_tokens) {
        if (std::find(tokens.begin(), tokens.end(), term) != tokens.end()) ++df;
      }
      if (df == 0) continue;
      const auto tf = static_cast<double>(
          std::count(passage_tokens[i].begin(), passage_tokens[i].end(), term));
      if (tf == 0.0) continue;
      const double idf = std::log(1.0 + (static_cast<double>(n_docs) - static_cast<double>(df) +
                                         0.5) /
                                            (static_cast<double>(df) + 0.5));
      const double norm =
          params.k1 *
          (1.0 - params.b +
           params.b * static_cast<double>(passage_tokens[i].size()) / avg_len);
      score += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
    if (score > 0.0) scored.emplace_back(score, passages[i].passage_id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  if (scored.size() > static_cast<std::size_t>(n)) scored.resize(static_cast<std::size_t>(n));

  std::vector<ScoredHit> hits;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    hits.push_back({scored[i].second, scored[i].first, static_cast<int>(i + 1)});
  }
  return hits;
}

std::vector<Passage> toy_corpus() {
  return {{"p1", "d1", "cat sat", 0}, {"p2", "d2", "dog ran", 0}, {"p3", "d3", "cat ran", 0}};
}

std::vector<Passage> random_corpus(std::mt19937& rng, std::size_t n_passages,
                                   int vocab = 40, int max_len = 30) {
  std::vector<Passage> passages;
  std::uniform_int_distribution<int> len_dist(1, max_len);
  std::uniform_int_distribution<int> term_dist(0, vocab - 1);
  for (std::size_t i = 0; i < n_passages; ++i) {
    std::string text;
    const int len = len_dist(rng);
    for (int w = 0; w < len; ++w) {
      if (!text.empty()) text.push_back(' ');
      text += "t" + std::to_string(term_dist(rng));
    }
    char id[16];
    std::snprintf(id, sizeof id, "p%04zu", i);
    passages.push_back({id, "d", text, 0});
  }
  return passages;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("build counts document frequencies and lengths") {
  const Bm25Index index = Bm25Index::build(toy_corpus(), {});
  CHECK(index.num_passages() == 3);
  CHECK(index.avg_len() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(index.doc_frequency("cat") == 2);
  CHECK(index.doc_frequency("ran") == 2);
  CHECK(index.doc_frequency("sat") == 1);
  CHECK(index.doc_frequency("missing") == 0);
}

TEST_CASE("single passage index is the degenerate case") {
  const Bm25Index index = Bm25Index::build({{"p0", "d0", "one two three", 0}}, {});
  CHECK(index.num_passages() == 1);
  CHECK(index.avg_len() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("empty corpus is rejected") {
  CHECK_THROWS_AS(Bm25Index::build({}, {}), Error);
}

TEST_CASE("idf for N=3, df=1 evaluates to ln(1 + 2.5/1.5)") {
  const Bm25Index index = Bm25Index::build(toy_corpus(), {});
  CHECK(index.idf("sat") == doctest::Approx(0.98083).epsilon(1e-5));
  CHECK(index.idf("sat") == doctest::Approx(std::log(1.0 + 2.5 / 1.5)).epsilon(1e-12));
}

TEST_CASE("idf is non-negative for every df under the +1 formulation") {
  for (std::size_t n = 1; n <= 50; ++n) {
    for (std::size_t df = 0; df <= n; ++df) {
      const double idf = std::log(1.0 + (static_cast<double>(n) - df + 0.5) / (df + 0.5));
      CHECK(idf >= 0.0);
    }
  }
}

TEST_CASE("query 'cat' returns p1 and p3, never p2") {
  const Bm25Index index = Bm25Index::build(toy_corpus(), {1.2, 0.75});
  const std::vector<ScoredHit> hits = index.search("cat", 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].passage_id == "p1");  // equal scores, tie broken by id
  CHECK(hits[1].passage_id == "p3");
  CHECK(hits[0].score == doctest::Approx(hits[1].score).epsilon(1e-12));
  CHECK(hits[0].rank == 1);
  CHECK(hits[1].rank == 2);

  const std::vector<ScoredHit> oracle = brute_force_search(toy_corpus(), "cat", 2, {1.2, 0.75});
  REQUIRE(oracle.size() == 2);
  CHECK(oracle[0].passage_id == hits[0].passage_id);
  CHECK(oracle[0].score == doctest::Approx(hits[0].score).epsilon(1e-12));
}

TEST_CASE("out-of-vocabulary query returns nothing") {
  const Bm25Index index = Bm25Index::build(toy_corpus(), {});
  CHECK(index.search("zebra quark", 5).empty());
}

TEST_CASE("postings term-frequency sums equal independent corpus counts") {
  std::mt19937 rng(7);
  const std::vector<Passage> passages = random_corpus(rng, 100);
  const Bm25Index index = Bm25Index::build(passages, {});

  // Independent hash-map counter over the raw passages.
  std::map<std::string, std::uint64_t> counter;
  for (const Passage& p : passages) {
    for (const std::string& t : tokenize(p.text)) ++counter[t];
  }
  for (const auto& [term, total] : counter) {
    CHECK(index.collection_frequency(term) == total);
    CHECK(index.doc_frequency(term) >= 1);
    CHECK(index.doc_frequency(term) <= total);
  }
  CHECK(index.vocab_size() == counter.size());
  CHECK(index.collection_frequency("never-seen") == 0);
}

TEST_CASE("oracle equivalence on randomized corpora") {
  std::mt19937 rng(20260810);
  for (int round = 0; round < 8; ++round) {
    const std::size_t n_passages = 20 + rng() % 181;  // up to ~200
    const std::vector<Passage> passages = random_corpus(rng, n_passages);
    const Bm25Params params{0.5 + (rng() % 20) / 10.0, (rng() % 11) / 10.0};
    const Bm25Index index = Bm25Index::build(passages, params);

    for (int q = 0; q < 10; ++q) {
      std::string query;
      const int q_len = 1 + static_cast<int>(rng() % 4);
      for (int w = 0; w < q_len; ++w) {
        if (!query.empty()) query.push_back(' ');
        query += "t" + std::to_string(rng() % 50);
      }
      const auto expected = brute_force_search(passages, query, 10, params);
      const auto actual = index.search(query, 10);
      REQUIRE(actual.size() == expected.size());
      for (std::size_t i = 0; i < actual.size(); ++i) {
        CHECK(actual[i].passage_id == expected[i].passage_id);
        CHECK(actual[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
        CHECK(actual[i].rank == static_cast<int>(i + 1));
      }
    }
  }
}

TEST_CASE("term-frequency saturation is monotone") {
  // f(tf) = tf(k1+1)/(tf+K) strictly increases in tf for K > 0.
  const double k1 = 1.2;
  for (double K : {0.3, 1.0, 2.4}) {
    double previous = 0.0;
    for (int tf = 1; tf <= 20; ++tf) {
      const double value = tf * (k1 + 1.0) / (tf + K);
      CHECK(value > previous);
      previous = value;
    }
  }
}

TEST_CASE("permuting passage order changes no search result") {
  std::mt19937 rng(99);
  std::vector<Passage> passages = random_corpus(rng, 60);
  const Bm25Index index_a = Bm25Index::build(passages, {});

  std::vector<Passage> shuffled = passages;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const Bm25Index index_b = Bm25Index::build(shuffled, {});

  for (int q = 0; q < 20; ++q) {
    const std::string query = "t" + std::to_string(rng() % 40);
    const auto a = index_a.search(query, 10);
    const auto b = index_b.search(query, 10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].passage_id == b[i].passage_id);
      CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-12));
    }
  }
}

TEST_CASE("save/load round-trip reproduces searches bit-for-bit") {
  std::mt19937 rng(3);
  const std::vector<Passage> passages = random_corpus(rng, 40);
  const Bm25Index index = Bm25Index::build(passages, {1.4, 0.6});
  const std::string path = temp_path("decor_bm25.idx");
  index.save(path);
  const Bm25Index loaded = Bm25Index::load(path);

  CHECK(loaded.params().k1 == index.params().k1);
  CHECK(loaded.avg_len() == index.avg_len());
  for (int q = 0; q < 10; ++q) {
    const std::string query = "t" + std::to_string(q) + " t" + std::to_string(q + 20);
    const auto a = index.search(query, 7);
    const auto b = loaded.search(query, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].passage_id == b[i].passage_id);
      CHECK(a[i].score == b[i].score);  // exact: same doubles after round-trip
    }
  }
}

TEST_CASE("version gate and checksum gate") {
  const Bm25Index index = Bm25Index::build(toy_corpus(), {});
  const std::string path = temp_path("decor_bm25_gate.idx");
  index.save(path);

  SUBCASE("format_version 99 is refused") {
    std::string blob = read_file(path);
    const auto newline = blob.find('\n');
    std::string header = blob.substr(0, newline);
    const std::string needle = "\"format_version\":1";
    header.replace(header.find(needle), needle.size(), "\"format_version\":99");
    write_file(path, header + blob.substr(newline));
    try {
      Bm25Index::load(path);
      FAIL("expected VersionMismatch");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::VersionMismatch);
    }
  }

  SUBCASE("truncated file is corrupt") {
    const std::string blob = read_file(path);
    write_file(path, blob.substr(0, blob.size() - 10));
    try {
      Bm25Index::load(path);
      FAIL("expected Corrupt");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Corrupt);
    }
  }
}
