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

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "decor/commands.hpp"
#include "decor/config.hpp"
#include "decor/errors.hpp"

namespace {

// Flags override the config file. Only flags the user actually passed are
// applied, so the file remains the single source of defaults.
struct Overrides {
  std::optional<std::string> corpus_path, queries_path, workdir;
  std::optional<int> chunk_size, overlap;
  std::optional<std::string> corpus_format, matcher;
  std::vector<std::string> question_types;

  std::optional<double> k1, b;

  std::optional<std::string> embedder_backend, embedder_endpoint, embedder_model;
  std::optional<std::string> query_prefix, passage_prefix, cache_path;
  std::optional<int> dim, batch_size, embedder_concurrency;

  std::optional<std::string> llm_backend, llm_endpoint, llm_model, transcript;
  std::optional<bool> record_transcript;
  std::optional<double> temperature;
  std::optional<int> max_tokens, llm_concurrency;

  std::optional<std::string> method, run_tag;
  std::optional<int> n, k, workers;
  std::vector<std::string> ablations;

  std::optional<std::string> hits_variant;
  std::vector<int> hits_ks, map_ks, mrr_ks;
  std::optional<bool> per_query;
};

void apply_overrides(decor::AppConfig& config, const Overrides& o) {
  using decor::CorpusFormat;
  using decor::EmbedderBackend;
  using decor::Error;
  using decor::ErrorKind;
  using decor::FactMatcher;
  using decor::HitsVariant;
  using decor::LlmBackend;

  if (o.corpus_path) config.corpus_path = *o.corpus_path;
  if (o.queries_path) config.queries_path = *o.queries_path;
  if (o.workdir) config.workdir = *o.workdir;
  if (o.chunk_size) config.corpus.chunk_size = *o.chunk_size;
  if (o.overlap) config.corpus.overlap = *o.overlap;
  if (o.corpus_format) {
    if (*o.corpus_format == "multihop_rag") {
      config.corpus.format = CorpusFormat::multihop_rag;
    } else if (*o.corpus_format == "generic_json") {
      config.corpus.format = CorpusFormat::generic_json;
    } else {
      throw Error(ErrorKind::ConfigError, "--format: expected multihop_rag or generic_json");
    }
  }
  if (o.matcher) {
    if (*o.matcher == "normalized_substring") {
      config.corpus.matcher = FactMatcher::normalized_substring;
    } else if (*o.matcher == "exact") {
      config.corpus.matcher = FactMatcher::exact;
    } else {
      throw Error(ErrorKind::ConfigError, "--matcher: expected normalized_substring or exact");
    }
  }
  if (!o.question_types.empty()) config.corpus.question_types = o.question_types;

  if (o.k1) config.bm25.k1 = *o.k1;
  if (o.b) config.bm25.b = *o.b;

  if (o.embedder_backend) {
    if (*o.embedder_backend == "http") {
      config.embedder.backend = EmbedderBackend::http;
    } else if (*o.embedder_backend == "mock_hashed_bow") {
      config.embedder.backend = EmbedderBackend::mock_hashed_bow;
    } else {
      throw Error(ErrorKind::ConfigError, "--embedder: expected http or mock_hashed_bow");
    }
  }
  if (o.embedder_endpoint) config.embedder.endpoint_url = *o.embedder_endpoint;
  if (o.embedder_model) config.embedder.model_name = *o.embedder_model;
  if (o.dim) config.embedder.dim = *o.dim;
  if (o.batch_size) config.embedder.batch_size = *o.batch_size;
  if (o.embedder_concurrency) config.embedder.max_concurrent = *o.embedder_concurrency;
  if (o.query_prefix) config.embedder.query_prefix = *o.query_prefix;
  if (o.passage_prefix) config.embedder.passage_prefix = *o.passage_prefix;
  if (o.cache_path) config.embedder.cache_path = *o.cache_path;

  if (o.llm_backend) {
    if (*o.llm_backend == "http") {
      config.llm.backend = LlmBackend::http;
    } else if (*o.llm_backend == "scripted") {
      config.llm.backend = LlmBackend::scripted;
    } else if (*o.llm_backend == "heuristic") {
      config.llm.backend = LlmBackend::heuristic;
    } else {
      throw Error(ErrorKind::ConfigError, "--llm: expected http, scripted, or heuristic");
    }
  }
  if (o.llm_endpoint) config.llm.endpoint_url = *o.llm_endpoint;
  if (o.llm_model) config.llm.model_name = *o.llm_model;
  if (o.transcript) config.llm.transcript_path = *o.transcript;
  if (o.record_transcript) config.llm.record_transcript = *o.record_transcript;
  if (o.temperature) config.llm.temperature = *o.temperature;
  if (o.max_tokens) config.llm.max_tokens = *o.max_tokens;
  if (o.llm_concurrency) config.llm.max_concurrent = *o.llm_concurrency;

  if (o.method) config.pipeline.method = decor::method_from_string(*o.method);
  if (o.n) config.pipeline.n = *o.n;
  if (o.k) config.pipeline.k = *o.k;
  if (o.workers) config.pipeline.workers = *o.workers;
  if (o.run_tag) config.pipeline.run_tag = *o.run_tag;
  for (const std::string& ablation : o.ablations) {
    if (ablation == "no_decomposition") {
      config.pipeline.no_decomposition = true;
    } else if (ablation == "no_compression") {
      config.pipeline.no_compression = true;
    } else if (ablation == "document_wise_compression") {
      config.pipeline.document_wise_compression = true;
    } else if (ablation == "concat_embedding") {
      config.pipeline.concat_embedding = true;
    } else if (ablation == "no_expansion") {
      config.pipeline.no_expansion = true;
    } else {
      throw Error(ErrorKind::ConfigError,
                  "--ablation: unknown flag '" + ablation +
                      "' (expected no_decomposition, no_compression, "
                      "document_wise_compression, concat_embedding, no_expansion)");
    }
  }

  if (o.hits_variant) {
    if (*o.hits_variant == "micro") {
      config.eval.hits_variant = HitsVariant::micro;
    } else if (*o.hits_variant == "macro") {
      config.eval.hits_variant = HitsVariant::macro;
    } else {
      throw Error(ErrorKind::ConfigError, "--hits-variant: expected micro or macro");
    }
  }
  if (!o.hits_ks.empty()) config.eval.hits_ks = o.hits_ks;
  if (!o.map_ks.empty()) config.eval.map_ks = o.map_ks;
  if (!o.mrr_ks.empty()) config.eval.mrr_ks = o.mrr_ks;
  if (o.per_query) config.eval.per_query = *o.per_query;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decor: multi-hop retrieval via query decomposition and "
               "query-aware document compression"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override its values)");

  Overrides o;
  // Shared path/corpus options.
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--workdir", o.workdir, "Artifact directory");
  };

  CLI::App* ingest = app.add_subcommand(
      "ingest", "Load corpus + queries, chunk into passages, derive qrels");
  add_common(ingest);
  ingest->add_option("--corpus", o.corpus_path, "Corpus JSON file");
  ingest->add_option("--queries", o.queries_path, "Query JSON file");
  ingest->add_option("--chunk-size", o.chunk_size,
                     "Words per passage (0 = whole-document passages)");
  ingest->add_option("--overlap", o.overlap, "Overlapping words between adjacent passages");
  ingest->add_option("--format", o.corpus_format, "Corpus format: multihop_rag | generic_json");
  ingest->add_option("--matcher", o.matcher,
                     "Fact-to-passage matcher: normalized_substring | exact");
  ingest->add_option("--question-type", o.question_types,
                     "Keep only queries of this question_type (repeatable)");

  CLI::App* index = app.add_subcommand("index", "Build the BM25 and dense vector indexes");
  add_common(index);
  index->add_option("--k1", o.k1, "BM25 k1 (term-frequency saturation)");
  index->add_option("--b", o.b, "BM25 b (length normalization)");
  index->add_option("--embedder", o.embedder_backend, "Embedder backend: http | mock_hashed_bow");
  index->add_option("--embedder-endpoint", o.embedder_endpoint, "Embeddings endpoint base URL");
  index->add_option("--embedder-model", o.embedder_model, "Embeddings model name");
  index->add_option("--dim", o.dim, "Mock embedder dimension");
  index->add_option("--batch-size", o.batch_size, "Embedding request batch size");
  index->add_option("--embedder-concurrency", o.embedder_concurrency,
                    "Max in-flight embedding requests");
  index->add_option("--passage-prefix", o.passage_prefix, "Prefix prepended to passages");
  index->add_option("--cache", o.cache_path, "Embedding cache file");

  CLI::App* run = app.add_subcommand("run", "Execute a retrieval pipeline over the query set");
  add_common(run);
  run->add_option("--method", o.method, "decor | plain | hyde | query2doc");
  run->add_option("--ablation", o.ablations,
                  "Ablation flag, repeatable: no_decomposition, no_compression, "
                  "document_wise_compression, concat_embedding, no_expansion");
  run->add_option("--n", o.n, "BM25 candidates per sub-query");
  run->add_option("--k", o.k, "Final top-k");
  run->add_option("--run-tag", o.run_tag, "Tag stamped on run/trace files");
  run->add_option("--workers", o.workers, "Concurrent queries");
  run->add_option("--llm", o.llm_backend, "Chat backend: http | scripted | heuristic");
  run->add_option("--llm-endpoint", o.llm_endpoint, "Chat endpoint base URL");
  run->add_option("--llm-model", o.llm_model, "Chat model name");
  run->add_option("--transcript", o.transcript, "Chat transcript file (scripted/replay)");
  run->add_flag("--record-transcript", [&o](std::int64_t) { o.record_transcript = true; },
                "Append live chat responses to the transcript file");
  run->add_option("--temperature", o.temperature, "Chat sampling temperature");
  run->add_option("--max-tokens", o.max_tokens, "Chat completion token cap");
  run->add_option("--llm-concurrency", o.llm_concurrency, "Max in-flight chat requests");
  run->add_option("--embedder", o.embedder_backend, "Embedder backend: http | mock_hashed_bow");
  run->add_option("--embedder-endpoint", o.embedder_endpoint, "Embeddings endpoint base URL");
  run->add_option("--embedder-model", o.embedder_model, "Embeddings model name");
  run->add_option("--dim", o.dim, "Mock embedder dimension");
  run->add_option("--query-prefix", o.query_prefix, "Prefix prepended to query-side texts");
  run->add_option("--cache", o.cache_path, "Embedding cache file");

  CLI::App* eval = app.add_subcommand("eval", "Score run files against the qrels");
  add_common(eval);
  std::vector<std::string> run_paths;
  std::string qrels_path;
  eval->add_option("--run", run_paths, "Run file (repeat to compare runs)")->required();
  eval->add_option("--qrels", qrels_path, "Qrels file (defaults to workdir/qrels.txt)");
  eval->add_option("--hits-k", o.hits_ks, "Hits@k cutoffs (repeatable)");
  eval->add_option("--map-k", o.map_ks, "MAP@k cutoffs (repeatable)");
  eval->add_option("--mrr-k", o.mrr_ks, "MRR@k cutoffs (repeatable)");
  eval->add_option("--hits-variant", o.hits_variant, "micro | macro");
  eval->add_flag("--per-query", [&o](std::int64_t) { o.per_query = true; },
                 "Include the per-query breakdown in the report");

  CLI11_PARSE(app, argc, argv);

  try {
    decor::AppConfig config =
        config_path.empty() ? decor::AppConfig{} : decor::load_app_config(config_path);
    apply_overrides(config, o);

    if (ingest->parsed()) {
      const decor::IngestSummary s = decor::cmd_ingest(config);
      std::cout << "ingested " << s.num_docs << " documents -> " << s.num_passages
                << " passages; " << s.num_queries << " queries, " << s.num_gold_pairs
                << " gold pairs, " << s.num_unmatched_facts << " unmatched facts\n";
    } else if (index->parsed()) {
      const decor::IndexSummary s = decor::cmd_index(config);
      std::cout << "indexed " << s.num_passages << " passages (" << s.vocabulary_terms
                << " terms, dense dim " << s.dim << ")\n";
    } else if (run->parsed()) {
      const decor::RunSummary s = decor::cmd_run(config);
      std::cout << "run '" << s.run_tag << "': " << s.num_queries - s.num_failures << "/"
                << s.num_queries << " queries -> " << s.run_path << "\n";
      if (s.num_failures > 0) {
        std::cout << s.num_failures << " queries failed; see " << s.trace_path << "\n";
      }
    } else if (eval->parsed()) {
      const decor::EvalSummary s = decor::cmd_eval(config, run_paths, qrels_path);
      std::cout << s.table_text;
      std::cout << "report written to " << s.report_text_path << "\n";
    }
  } catch (const decor::Error& e) {
    std::cerr << "decor: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "decor: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
