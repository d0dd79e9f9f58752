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

#include "decor/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"

namespace decor {

namespace {

void require_artifact(const std::string& path, const std::string& producer) {
  if (!file_exists(path)) {
    throw Error(ErrorKind::MissingArtifact,
                "expected '" + path + "' (produce it with '" + producer + "')");
  }
}

std::string run_tag_of(const AppConfig& config) {
  if (!config.pipeline.run_tag.empty()) return config.pipeline.run_tag;
  std::string tag = to_string(config.pipeline.method);
  if (config.pipeline.method == Method::decor) {
    if (config.pipeline.no_expansion) return tag + "-no_expansion";
    if (config.pipeline.no_decomposition) tag += "-no_decomposition";
    if (config.pipeline.no_compression) tag += "-no_compression";
    if (config.pipeline.document_wise_compression) tag += "-document_wise";
    if (config.pipeline.concat_embedding) tag += "-concat_embedding";
  }
  return tag;
}

// Offline backends make a run reproducible; only then are trace timings
// zeroed so consecutive runs are byte-identical.
bool deterministic_backends(const AppConfig& config) {
  return config.llm.backend != LlmBackend::http &&
         config.embedder.backend != EmbedderBackend::http;
}

}  // namespace

ArtifactPaths::ArtifactPaths(const std::string& workdir) : workdir_(workdir) {
  auto join = [&](const char* name) { return workdir + "/" + name; };
  corpus_header = join("corpus_header.json");
  passages = join("passages.jsonl");
  queries = join("queries.jsonl");
  qrels = join("qrels.txt");
  unmatched = join("unmatched_facts.jsonl");
  bm25_index = join("bm25.idx");
  vector_index = join("dense.idx");
  embedding_cache = join("embedding_cache.jsonl");
}

std::string ArtifactPaths::run_file(const std::string& tag) const {
  return workdir_ + "/run_" + tag + ".trec";
}
std::string ArtifactPaths::trace_file(const std::string& tag) const {
  return workdir_ + "/trace_" + tag + ".jsonl";
}
std::string ArtifactPaths::report_text(const std::string& tag) const {
  return workdir_ + "/report_" + tag + ".txt";
}
std::string ArtifactPaths::report_csv(const std::string& tag) const {
  return workdir_ + "/report_" + tag + ".csv";
}

IngestSummary cmd_ingest(const AppConfig& config) {
  if (config.corpus_path.empty() || config.queries_path.empty()) {
    throw Error(ErrorKind::ConfigError, "paths.corpus and paths.queries are required for ingest");
  }
  require_artifact(config.corpus_path, "a corpus file");
  require_artifact(config.queries_path, "a query file");
  std::filesystem::create_directories(config.workdir);
  const ArtifactPaths paths(config.workdir);

  const std::vector<Document> docs = ingest_corpus(config.corpus_path, config.corpus.format);

  std::vector<QueryRecord> queries = load_queries(config.queries_path);
  if (!config.corpus.question_types.empty()) {
    const auto& keep = config.corpus.question_types;
    std::erase_if(queries, [&](const QueryRecord& q) {
      return std::find(keep.begin(), keep.end(), q.question_type) == keep.end();
    });
  }

  std::vector<Passage> passages;
  for (const Document& doc : docs) {
    std::vector<Passage> chunks =
        chunk_document(doc, config.corpus.chunk_size, config.corpus.overlap);
    passages.insert(passages.end(), std::make_move_iterator(chunks.begin()),
                    std::make_move_iterator(chunks.end()));
  }
  if (passages.empty()) throw Error(ErrorKind::EmptyCorpus, "chunking produced zero passages");

  const QrelsResult qrels = build_qrels(queries, passages, config.corpus.matcher);

  PassageStore store(std::move(passages), config.corpus.chunk_size, config.corpus.overlap);
  save_passage_store(store, paths.corpus_header, paths.passages);
  save_queries(queries, paths.queries);
  save_qrels(qrels.qrels, paths.qrels);
  save_unmatched_report(qrels.unmatched, paths.unmatched);

  IngestSummary summary;
  summary.num_docs = docs.size();
  summary.num_passages = store.size();
  summary.num_queries = queries.size();
  for (const auto& [query_id, gold] : qrels.qrels.gold) summary.num_gold_pairs += gold.size();
  summary.num_unmatched_facts = qrels.unmatched.size();
  return summary;
}

IndexSummary cmd_index(const AppConfig& config) {
  const ArtifactPaths paths(config.workdir);
  require_artifact(paths.corpus_header, "decor ingest");
  require_artifact(paths.passages, "decor ingest");

  const PassageStore store = load_passage_store(paths.corpus_header, paths.passages);

  Bm25Index bm25 = Bm25Index::build(store.passages(), config.bm25);
  bm25.save(paths.bm25_index);

  EmbedderConfig embedder_config = config.embedder;
  if (embedder_config.cache_path.empty()) embedder_config.cache_path = paths.embedding_cache;
  Embedder embedder(embedder_config);
  VectorIndex dense = VectorIndex::build(store.passages(), embedder);
  dense.save(paths.vector_index);

  IndexSummary summary;
  summary.num_passages = store.size();
  summary.vocabulary_terms = bm25.vocab_size();
  summary.dim = dense.dim();
  return summary;
}

RunSummary cmd_run(const AppConfig& config) {
  const ArtifactPaths paths(config.workdir);
  require_artifact(paths.corpus_header, "decor ingest");
  require_artifact(paths.passages, "decor ingest");
  require_artifact(paths.queries, "decor ingest");
  require_artifact(paths.vector_index, "decor index");
  const bool needs_bm25 = config.pipeline.method == Method::decor && !config.pipeline.no_expansion;
  if (needs_bm25) require_artifact(paths.bm25_index, "decor index");

  config.pipeline.validate();

  const PassageStore store = load_passage_store(paths.corpus_header, paths.passages);
  const std::vector<QueryRecord> queries = load_saved_queries(paths.queries);
  if (queries.empty()) throw Error(ErrorKind::EmptyCorpus, "query store is empty");

  const VectorIndex dense = VectorIndex::load(paths.vector_index);
  std::optional<Bm25Index> bm25;
  if (needs_bm25) bm25 = Bm25Index::load(paths.bm25_index);

  EmbedderConfig embedder_config = config.embedder;
  if (embedder_config.cache_path.empty()) embedder_config.cache_path = paths.embedding_cache;
  Embedder embedder(embedder_config);
  if (embedder.model_key() != dense.model()) {
    throw Error(ErrorKind::ConfigError, "embedder model '" + embedder.model_key() +
                                            "' does not match the index model '" + dense.model() +
                                            "'");
  }

  ChatClient llm(config.llm);

  SearchContext ctx;
  ctx.passages = &store;
  ctx.bm25 = bm25.has_value() ? &*bm25 : nullptr;
  ctx.dense = &dense;

  PipelineConfig pipeline = config.pipeline;
  pipeline.run_tag = run_tag_of(config);

  const RunResult result = run_batch(queries, pipeline, llm, embedder, ctx);

  RunSummary summary;
  summary.run_tag = result.run_tag;
  summary.run_path = paths.run_file(result.run_tag);
  summary.trace_path = paths.trace_file(result.run_tag);
  summary.num_queries = queries.size();
  for (const QueryRun& entry : result.entries) {
    if (entry.failed) ++summary.num_failures;
  }

  write_run_file(result, summary.run_path);
  write_trace_file(result, summary.trace_path, config_echo_json(config),
                   /*include_timings=*/!deterministic_backends(config));
  return summary;
}

EvalSummary cmd_eval(const AppConfig& config, const std::vector<std::string>& run_paths,
                     const std::string& qrels_path) {
  const ArtifactPaths paths(config.workdir);
  const std::string qrels_file = qrels_path.empty() ? paths.qrels : qrels_path;
  require_artifact(qrels_file, "decor ingest");
  if (run_paths.empty()) {
    throw Error(ErrorKind::ConfigError, "eval requires at least one --run file");
  }

  const Qrels qrels = load_qrels(qrels_file);

  EvalSummary summary;
  for (const std::string& run_path : run_paths) {
    require_artifact(run_path, "decor run");
    const RunFileData run = load_run_file(run_path);
    summary.reports.push_back(evaluate(run, qrels, config.eval));
  }

  if (summary.reports.size() == 1) {
    summary.table_text = render_report_text(summary.reports.front());
  } else {
    summary.table_text = render_comparison_text(summary.reports);
  }

  const std::string tag =
      summary.reports.size() == 1 ? summary.reports.front().run_tag : "comparison";
  summary.report_text_path = paths.report_text(tag);
  summary.report_csv_path = paths.report_csv(tag);
  write_file(summary.report_text_path, summary.table_text);
  write_file(summary.report_csv_path, render_comparison_csv(summary.reports));
  return summary;
}

}  // namespace decor
