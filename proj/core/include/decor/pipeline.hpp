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
#include <optional>
#include <string>
#include <vector>

#include "decor/bm25.hpp"
#include "decor/corpus.hpp"
#include "decor/embedding.hpp"
#include "decor/hit.hpp"
#include "decor/llm.hpp"

namespace decor {

enum class Method { decor, plain, hyde, query2doc };

Method method_from_string(const std::string& name);
const char* to_string(Method method) noexcept;

struct PipelineConfig {
  Method method = Method::decor;
  int n = 5;   // BM25 candidates per sub-query
  int k = 10;  // final top-k

  // Ablation switches; only meaningful with method = decor. no_expansion
  // overrides every other flag and reduces to the base dense retriever.
  bool no_decomposition = false;
  bool no_compression = false;
  bool document_wise_compression = false;
  bool concat_embedding = false;
  bool no_expansion = false;

  int workers = 1;  // concurrent queries in run_batch
  std::string run_tag;

  void validate() const;  // throws InvalidConfig
};

/// Read-only bundle the pipeline retrieves against.
struct SearchContext {
  const PassageStore* passages = nullptr;
  const Bm25Index* bm25 = nullptr;
  const VectorIndex* dense = nullptr;
};

struct StageTimings {
  double decompose_ms = 0.0;
  double retrieve_ms = 0.0;
  double compress_ms = 0.0;
  double embed_ms = 0.0;
  double search_ms = 0.0;
};

struct ExpandedQuery {
  std::string query_id;
  std::string original_text;
  std::vector<SubQuery> sub_queries;
  // Parallel to sub_queries; nullopt marks a sub-query whose candidate set
  // was empty, which drops its pair from the average (divisor shrinks).
  std::vector<std::optional<CompressedDoc>> compressed;
  std::vector<std::vector<ScoredHit>> candidates;
  Embedding expansion_embedding;
};

/// Per-query outcome plus the audit trace the run writes to disk.
struct QueryRun {
  std::string query_id;
  bool failed = false;
  std::string error;
  std::vector<ScoredHit> hits;
  std::vector<std::string> sub_queries;
  std::vector<std::vector<std::string>> candidates;
  std::vector<std::string> compressed_texts;
  std::uint64_t chat_calls = 0;
  std::uint64_t bm25_calls = 0;
  StageTimings timings;
};

struct RunResult {
  std::string run_tag;
  std::vector<QueryRun> entries;  // input order; includes failed queries
};

// The expansion reducer: unweighted arithmetic mean of the component
// embeddings, all of equal dimension.
Embedding mean_embedding(const std::vector<Embedding>& components);

ExpandedQuery expand_decor(const QueryRecord& query, const PipelineConfig& config,
                           ChatClient& llm, Embedder& embedder, const SearchContext& ctx,
                           StageTimings* timings = nullptr);

std::vector<ScoredHit> run_query(const QueryRecord& query, const PipelineConfig& config,
                                 ChatClient& llm, Embedder& embedder, const SearchContext& ctx);

// run_query plus trace capture; never throws for per-query failures.
QueryRun run_query_traced(const QueryRecord& query, const PipelineConfig& config,
                          ChatClient& llm, Embedder& embedder, const SearchContext& ctx);

// Executes queries (up to config.workers concurrently) and assembles results
// in input order. Individual query failures are recorded, never fatal.
RunResult run_batch(const std::vector<QueryRecord>& queries, const PipelineConfig& config,
                    ChatClient& llm, Embedder& embedder, const SearchContext& ctx);

// TREC run format: "query_id Q0 passage_id rank score run_tag" with the
// score printed to six decimal places.
void write_run_file(const RunResult& result, const std::string& path);
std::string render_run_file(const RunResult& result);

// JSON-lines trace: a config echo line, then one record per query. Stage
// timings are zeroed when include_timings is false so runs over
// deterministic backends are byte-identical.
void write_trace_file(const RunResult& result, const std::string& path,
                      const std::string& config_echo_json, bool include_timings);

}  // namespace decor
