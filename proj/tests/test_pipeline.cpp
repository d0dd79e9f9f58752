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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"
#include "decor/pipeline.hpp"

using namespace decor;
using nlohmann::json;

namespace {

Embedding vec(std::vector<double> values) { return Embedding{std::move(values)}; }

std::string temp_path(const std::string& name) {
  const std::string path = (std::filesystem::temp_directory_path() / name).string();
  std::filesystem::remove(path);
  return path;
}

// A small self-contained world: passages, both indexes, mock embedder, and a
// transcript that decomposes one bridge query.
struct World {
  PassageStore store;
  Bm25Index bm25;
  Embedder embedder;
  VectorIndex dense;
  SearchContext ctx;

  explicit World(const std::vector<Passage>& passages, int dim = 64)
      : store(passages, 0, 0),
        bm25(Bm25Index::build(passages, {})),
        embedder(make_embedder(dim)),
        dense(VectorIndex::build(passages, embedder)) {
    ctx.passages = &store;
    ctx.bm25 = &bm25;
    ctx.dense = &dense;
  }

  static Embedder make_embedder(int dim) {
    EmbedderConfig config;
    config.backend = EmbedderBackend::mock_hashed_bow;
    config.dim = dim;
    return Embedder(config);
  }
};

std::vector<Passage> small_world_passages() {
  return {
      {"p0", "d0", "seoul is the capital of korea", 0},
      {"p1", "d1", "alpine railway climbs through tunnels", 0},
      {"p2", "d2", "markets in seoul sell kimchi", 0},
      {"p3", "d3", "glaciers carve deep valleys", 0},
  };
}

QueryRecord make_query(const std::string& id, const std::string& text) {
  QueryRecord q;
  q.query_id = id;
  q.text = text;
  return q;
}

ChatClient heuristic_client() {
  ChatClientConfig config;
  config.backend = LlmBackend::heuristic;
  return ChatClient(config);
}

}  // namespace

TEST_CASE("mean_embedding implements the expansion arithmetic") {
  SUBCASE("m=1: mean of [1,0] and [0,1] is [0.5,0.5]") {
    const Embedding e = mean_embedding({vec({1, 0}), vec({0, 1})});
    CHECK(e.values == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("m=2: three unit axes average to [1/3,1/3,1/3]") {
    const Embedding e = mean_embedding({vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1})});
    for (double v : e.values) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("mean of identical vectors is that vector") {
    const Embedding v0 = vec({0.3, -0.2, 0.9});
    const Embedding e = mean_embedding({v0, v0, v0, v0});
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(e.values[i] == doctest::Approx(v0.values[i]).epsilon(1e-12));
    }
  }
  SUBCASE("order of components is irrelevant") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-1, 1);
    std::vector<Embedding> components;
    for (int i = 0; i < 5; ++i) {
      std::vector<double> values(8);
      for (double& x : values) x = dist(rng);
      components.push_back(vec(values));
    }
    const Embedding forward = mean_embedding(components);
    std::shuffle(components.begin(), components.end(), rng);
    const Embedding shuffled = mean_embedding(components);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(forward.values[i] == doctest::Approx(shuffled.values[i]).epsilon(1e-12));
    }
  }
  SUBCASE("mixed dimensions and empty input are rejected") {
    CHECK_THROWS_AS(mean_embedding({}), Error);
    CHECK_THROWS_AS(mean_embedding({vec({1, 0}), vec({1, 0, 0})}), Error);
  }
}

TEST_CASE("expand_decor averages query and pair embeddings") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  config.n = 2;

  const QueryRecord query = make_query("q0", "capital of korea and kimchi markets in seoul");
  const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);

  REQUIRE(expanded.sub_queries.size() == 2);  // heuristic splits on " and "
  REQUIRE(expanded.compressed.size() == expanded.sub_queries.size());
  REQUIRE(expanded.candidates.size() == expanded.sub_queries.size());

  // Recompute the mean independently from the traced components.
  std::vector<Embedding> components;
  components.push_back(world.embedder.embed_one(query.text));
  for (std::size_t i = 0; i < expanded.sub_queries.size(); ++i) {
    if (!expanded.compressed[i].has_value()) continue;
    components.push_back(world.embedder.embed_one(expanded.sub_queries[i].text + " " +
                                                  expanded.compressed[i]->text));
  }
  const Embedding expected = mean_embedding(components);
  REQUIRE(expanded.expansion_embedding.dim() == expected.dim());
  for (std::size_t i = 0; i < expected.dim(); ++i) {
    CHECK(expanded.expansion_embedding.values[i] ==
          doctest::Approx(expected.values[i]).epsilon(1e-9));
  }
}

TEST_CASE("empty-candidate sub-queries are skipped with divisor adjustment") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;

  // Second clause shares no token with the corpus: BM25 returns nothing.
  const QueryRecord query = make_query("q0", "capital of korea and xylophone zephyr");
  const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);

  REQUIRE(expanded.sub_queries.size() == 2);
  CHECK(expanded.compressed[0].has_value());
  CHECK_FALSE(expanded.compressed[1].has_value());
  CHECK(expanded.candidates[1].empty());

  // Divisor must be (#non-empty + 1) = 2, not m + 1 = 3.
  const Embedding q_emb = world.embedder.embed_one(query.text);
  const Embedding pair = world.embedder.embed_one(expanded.sub_queries[0].text + " " +
                                                  expanded.compressed[0]->text);
  const Embedding expected = mean_embedding({q_emb, pair});
  for (std::size_t i = 0; i < expected.dim(); ++i) {
    CHECK(expanded.expansion_embedding.values[i] ==
          doctest::Approx(expected.values[i]).epsilon(1e-9));
  }

  // Sum identity: e_exp * (#non-empty + 1) == sum of components.
  for (std::size_t i = 0; i < expected.dim(); ++i) {
    const double total = q_emb.values[i] + pair.values[i];
    CHECK(expanded.expansion_embedding.values[i] * 2.0 == doctest::Approx(total).epsilon(1e-9));
  }
}

TEST_CASE("all-empty candidates degrade to the query embedding alone") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  const QueryRecord query = make_query("q0", "xylophone zephyr");
  const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);
  const Embedding q_emb = world.embedder.embed_one(query.text);
  for (std::size_t i = 0; i < q_emb.dim(); ++i) {
    CHECK(expanded.expansion_embedding.values[i] ==
          doctest::Approx(q_emb.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("flag semantics are structurally observable") {
  World world(small_world_passages());
  const QueryRecord query = make_query("q0", "capital of korea and kimchi markets in seoul");

  SUBCASE("no_decomposition forces m = 1") {
    ChatClient llm = heuristic_client();
    PipelineConfig config;
    config.no_decomposition = true;
    const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);
    CHECK(expanded.sub_queries.size() == 1);
    CHECK(expanded.sub_queries[0].text == query.text);
  }

  SUBCASE("no_compression joins candidate texts without chat calls") {
    ChatClient llm = heuristic_client();
    PipelineConfig config;
    config.no_compression = true;
    config.no_decomposition = true;
    config.n = 2;
    const std::uint64_t before = llm.request_count();
    const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);
    CHECK(llm.request_count() == before);  // zero chat traffic
    REQUIRE(expanded.compressed[0].has_value());
    std::string joined;
    for (const ScoredHit& hit : expanded.candidates[0]) {
      if (!joined.empty()) joined.push_back(' ');
      joined += world.store.at(hit.passage_id).text;
    }
    CHECK(expanded.compressed[0]->text == joined);
  }

  SUBCASE("document_wise issues one call per candidate") {
    ChatClient llm = heuristic_client();
    PipelineConfig config;
    config.no_decomposition = true;
    config.document_wise_compression = true;
    config.n = 3;
    const std::uint64_t before = llm.request_count();
    const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);
    CHECK(llm.request_count() - before ==
          static_cast<std::uint64_t>(expanded.candidates[0].size()));
  }

  SUBCASE("concat_embedding embeds one concatenated text") {
    ChatClient llm = heuristic_client();
    PipelineConfig config;
    config.concat_embedding = true;
    const ExpandedQuery expanded = expand_decor(query, config, llm, world.embedder, world.ctx);
    std::string concatenated = query.text;
    for (std::size_t i = 0; i < expanded.sub_queries.size(); ++i) {
      if (!expanded.compressed[i].has_value()) continue;
      concatenated +=
          " " + expanded.sub_queries[i].text + " " + expanded.compressed[i]->text;
    }
    const Embedding expected = world.embedder.embed_one(concatenated);
    CHECK(expanded.expansion_embedding.values == expected.values);
  }

  SUBCASE("ablation flags demand method=decor") {
    PipelineConfig config;
    config.method = Method::plain;
    config.no_decomposition = true;
    CHECK_THROWS_AS(config.validate(), Error);
  }
}

TEST_CASE("no_expansion and plain produce identical runs with zero llm/bm25 traffic") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  const std::vector<QueryRecord> queries = {
      make_query("q0", "capital of korea"),
      make_query("q1", "railway tunnels"),
  };

  PipelineConfig plain_config;
  plain_config.method = Method::plain;
  plain_config.run_tag = "same-tag";
  const RunResult plain = run_batch(queries, plain_config, llm, world.embedder, world.ctx);

  PipelineConfig ablated;
  ablated.method = Method::decor;
  ablated.no_expansion = true;
  ablated.run_tag = "same-tag";
  const std::uint64_t chats_before = llm.request_count();
  const RunResult no_expansion = run_batch(queries, ablated, llm, world.embedder, world.ctx);

  CHECK(llm.request_count() == chats_before);  // zero chat calls
  for (const QueryRun& entry : no_expansion.entries) CHECK(entry.bm25_calls == 0);
  CHECK(render_run_file(plain) == render_run_file(no_expansion));
}

TEST_CASE("hyde and query2doc issue exactly one chat call") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  const QueryRecord query = make_query("q0", "capital of korea");

  for (Method method : {Method::hyde, Method::query2doc}) {
    PipelineConfig config;
    config.method = method;
    const std::uint64_t before = llm.request_count();
    const QueryRun run = run_query_traced(query, config, llm, world.embedder, world.ctx);
    REQUIRE_FALSE(run.failed);
    CHECK(llm.request_count() - before == 1);
    CHECK(run.chat_calls == 1);
    CHECK_FALSE(run.hits.empty());
  }
}

TEST_CASE("k=1 returns exactly one hit") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  config.method = Method::plain;
  config.k = 1;
  const auto hits =
      run_query(make_query("q0", "capital of korea"), config, llm, world.embedder, world.ctx);
  CHECK(hits.size() == 1);
}

TEST_CASE("per-query failures are recorded, never fatal") {
  World world(small_world_passages());
  // Scripted transcript with a single decomposition entry: the second query
  // misses and fails, the first succeeds.
  const std::string path = temp_path("decor_pipeline_transcript.jsonl");
  {
    std::ofstream out(path);
    json row = {{"request_hash", ChatClient::request_hash(prompts::kDecomposition, "good query")},
                {"response", R"(["good query"])"}};
    out << row.dump() << "\n";
    // Its compression entry:
    // BM25 for "good query" over this corpus returns nothing (no overlap), so
    // no compression call happens. Keep the corpus word in the query instead.
  }
  ChatClientConfig scripted;
  scripted.backend = LlmBackend::scripted;
  scripted.transcript_path = path;
  ChatClient llm(scripted);

  PipelineConfig config;
  config.no_compression = true;  // decomposition is the only chat call
  const std::vector<QueryRecord> queries = {
      make_query("q0", "good query"),
      make_query("q1", "unknown to transcript"),
      make_query("q2", "good query"),
  };
  const RunResult result = run_batch(queries, config, llm, world.embedder, world.ctx);
  REQUIRE(result.entries.size() == 3);
  CHECK_FALSE(result.entries[0].failed);
  CHECK(result.entries[1].failed);
  CHECK(result.entries[1].error.find("transcript_miss") != std::string::npos);
  CHECK_FALSE(result.entries[2].failed);

  // The run file carries the two successful queries only, in input order.
  const std::string rendered = render_run_file(result);
  CHECK(rendered.find("q1 ") == std::string::npos);
  CHECK(rendered.find("q0 ") != std::string::npos);
  CHECK(rendered.find("q2 ") != std::string::npos);
}

TEST_CASE("run files are ordered by input, formatted to six decimals") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  config.method = Method::plain;
  config.run_tag = "fmt";
  config.k = 2;
  const std::vector<QueryRecord> queries = {
      make_query("qB", "capital of korea"),
      make_query("qA", "railway tunnels"),
  };
  const RunResult result = run_batch(queries, config, llm, world.embedder, world.ctx);
  const std::string rendered = render_run_file(result);

  // qB lines come first (input order), each line has 6 columns and a
  // 6-decimal score.
  REQUIRE(rendered.rfind("qB Q0 ", 0) == 0);
  std::istringstream lines(rendered);
  std::string line;
  int rank_check = 0;
  while (std::getline(lines, line)) {
    std::istringstream cols(line);
    std::string qid, q0, pid, rank, score, tag;
    const bool parsed = static_cast<bool>(cols >> qid >> q0 >> pid >> rank >> score >> tag);
    REQUIRE(parsed);
    CHECK(q0 == "Q0");
    CHECK(tag == "fmt");
    const auto dot = score.find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(score.size() - dot - 1 == 6);
    ++rank_check;
  }
  CHECK(rank_check == 4);  // 2 queries x k=2
}

TEST_CASE("parallel batches assemble in input order") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  config.method = Method::plain;
  config.workers = 4;
  std::vector<QueryRecord> queries;
  for (int i = 0; i < 24; ++i) {
    queries.push_back(make_query("q" + std::to_string(i),
                                 i % 2 == 0 ? "capital of korea" : "railway tunnels"));
  }
  const RunResult parallel = run_batch(queries, config, llm, world.embedder, world.ctx);
  config.workers = 1;
  const RunResult serial = run_batch(queries, config, llm, world.embedder, world.ctx);
  CHECK(render_run_file(parallel) == render_run_file(serial));
}

TEST_CASE("trace files echo the config and zero timings in deterministic mode") {
  World world(small_world_passages());
  ChatClient llm = heuristic_client();
  PipelineConfig config;
  config.run_tag = "trace-test";
  const RunResult result = run_batch({make_query("q0", "capital of korea")}, config, llm,
                                     world.embedder, world.ctx);
  const std::string path = temp_path("decor_trace.jsonl");
  write_trace_file(result, path, R"({"pipeline":{"method":"decor"}})", false);

  std::ifstream in(path);
  std::string first_line, second_line;
  REQUIRE(std::getline(in, first_line));
  REQUIRE(std::getline(in, second_line));
  const json echo = json::parse(first_line);
  CHECK(echo.at("config").at("pipeline").at("method") == "decor");
  CHECK(echo.at("run_tag") == "trace-test");
  const json row = json::parse(second_line);
  CHECK(row.at("query_id") == "q0");
  CHECK(row.at("timing_ms").at("search") == 0.0);
  CHECK(row.at("chat_calls").get<int>() >= 1);
  CHECK(row.at("sub_queries").is_array());
}
