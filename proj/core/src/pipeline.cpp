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

#include "decor/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"

namespace decor {

using nlohmann::json;

namespace {

// Minimal system prompt for the single-call generative baselines.
constexpr std::string_view kBaselineSystemPrompt = "You are a helpful assistant.";

class StageClock {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - mark_).count();
    mark_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

std::string joined_pair_text(const SubQuery& sub, const CompressedDoc& comp) {
  return sub.text + " " + comp.text;
}

}  // namespace

Method method_from_string(const std::string& name) {
  if (name == "decor") return Method::decor;
  if (name == "plain") return Method::plain;
  if (name == "hyde") return Method::hyde;
  if (name == "query2doc") return Method::query2doc;
  throw Error(ErrorKind::InvalidConfig, "unknown method '" + name + "'");
}

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::decor: return "decor";
    case Method::plain: return "plain";
    case Method::hyde: return "hyde";
    case Method::query2doc: return "query2doc";
  }
  return "unknown";
}

void PipelineConfig::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidConfig, "pipeline.n must be >= 1");
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "pipeline.k must be >= 1");
  if (workers < 1) throw Error(ErrorKind::InvalidConfig, "pipeline.workers must be >= 1");
  const bool any_flag = no_decomposition || no_compression || document_wise_compression ||
                        concat_embedding || no_expansion;
  if (any_flag && method != Method::decor) {
    throw Error(ErrorKind::InvalidConfig,
                "ablation flags apply to method=decor only (method is " +
                    std::string(to_string(method)) + ")");
  }
}

Embedding mean_embedding(const std::vector<Embedding>& components) {
  if (components.empty()) {
    throw Error(ErrorKind::InvalidConfig, "mean over zero embeddings is undefined");
  }
  const std::size_t dim = components.front().dim();
  Embedding out;
  out.values.assign(dim, 0.0);
  for (const Embedding& component : components) {
    if (component.dim() != dim) {
      throw Error(ErrorKind::DimMismatch, "mean over embeddings of mixed dimensions");
    }
    for (std::size_t i = 0; i < dim; ++i) out.values[i] += component.values[i];
  }
  const double divisor = static_cast<double>(components.size());
  for (double& v : out.values) v /= divisor;
  return out;
}

ExpandedQuery expand_decor(const QueryRecord& query, const PipelineConfig& config,
                           ChatClient& llm, Embedder& embedder, const SearchContext& ctx,
                           StageTimings* timings) {
  StageTimings local;
  StageTimings& t = timings != nullptr ? *timings : local;
  StageClock clock;

  ExpandedQuery out;
  out.query_id = query.query_id;
  out.original_text = query.text;

  if (config.no_decomposition) {
    out.sub_queries = {{query.text, 1}};
  } else {
    out.sub_queries = decompose_query(llm, query.text);
  }
  t.decompose_ms = clock.lap_ms();

  const CompressionMode mode = config.document_wise_compression
                                   ? CompressionMode::document_wise
                                   : CompressionMode::concatenated;

  for (const SubQuery& sub : out.sub_queries) {
    StageClock stage;
    std::vector<ScoredHit> hits = ctx.bm25->search(sub.text, config.n);
    t.retrieve_ms += stage.lap_ms();
    if (hits.empty()) {
      // No candidates: this pair drops out of the average entirely.
      out.candidates.emplace_back();
      out.compressed.emplace_back(std::nullopt);
      continue;
    }
    std::vector<Passage> docs;
    docs.reserve(hits.size());
    for (const ScoredHit& hit : hits) docs.push_back(ctx.passages->at(hit.passage_id));

    if (config.no_compression) {
      CompressedDoc merged;
      merged.sub_query_ordinal = sub.ordinal;
      for (const Passage& doc : docs) {
        merged.source_passage_ids.push_back(doc.passage_id);
        if (!merged.text.empty()) merged.text.push_back(' ');
        merged.text += doc.text;
      }
      out.compressed.emplace_back(std::move(merged));
    } else {
      out.compressed.emplace_back(compress_documents(llm, sub, docs, mode));
    }
    t.compress_ms += stage.lap_ms();
    out.candidates.push_back(std::move(hits));
  }

  clock.lap_ms();
  const std::string& prefix = embedder.config().query_prefix;
  if (config.concat_embedding) {
    // Ablation: one embedding over the full concatenated text instead of the
    // average of component embeddings.
    std::string concatenated = query.text;
    for (std::size_t i = 0; i < out.sub_queries.size(); ++i) {
      if (!out.compressed[i].has_value()) continue;
      concatenated += " " + joined_pair_text(out.sub_queries[i], *out.compressed[i]);
    }
    out.expansion_embedding = embedder.embed_one(prefix + concatenated);
    t.embed_ms = clock.lap_ms();
    return out;
  }

  std::vector<std::string> component_texts;
  component_texts.reserve(out.sub_queries.size() + 1);
  component_texts.push_back(prefix + query.text);
  for (std::size_t i = 0; i < out.sub_queries.size(); ++i) {
    if (!out.compressed[i].has_value()) continue;
    component_texts.push_back(prefix + joined_pair_text(out.sub_queries[i], *out.compressed[i]));
  }
  out.expansion_embedding = mean_embedding(embedder.embed(component_texts));
  t.embed_ms = clock.lap_ms();
  return out;
}

QueryRun run_query_traced(const QueryRecord& query, const PipelineConfig& config,
                          ChatClient& llm, Embedder& embedder, const SearchContext& ctx) {
  QueryRun run;
  run.query_id = query.query_id;
  StageClock clock;
  const std::string& prefix = embedder.config().query_prefix;

  try {
    Embedding final_embedding;

    if (config.method == Method::plain ||
        (config.method == Method::decor && config.no_expansion)) {
      final_embedding = embedder.embed_one(prefix + query.text);
      run.timings.embed_ms = clock.lap_ms();
    } else if (config.method == Method::decor) {
      ExpandedQuery expanded = expand_decor(query, config, llm, embedder, ctx, &run.timings);
      clock.lap_ms();

      for (std::size_t i = 0; i < expanded.sub_queries.size(); ++i) {
        run.sub_queries.push_back(expanded.sub_queries[i].text);
        std::vector<std::string> ids;
        for (const ScoredHit& hit : expanded.candidates[i]) ids.push_back(hit.passage_id);
        run.candidates.push_back(std::move(ids));
        run.compressed_texts.push_back(
            expanded.compressed[i].has_value() ? expanded.compressed[i]->text : "");
      }
      run.bm25_calls = expanded.sub_queries.size();

      std::uint64_t chat = config.no_decomposition ? 0 : 1;
      if (!config.no_compression) {
        for (std::size_t i = 0; i < expanded.candidates.size(); ++i) {
          if (expanded.candidates[i].empty()) continue;
          chat += config.document_wise_compression ? expanded.candidates[i].size() : 1;
        }
      }
      run.chat_calls = chat;
      final_embedding = std::move(expanded.expansion_embedding);
    } else {
      // Generative baselines: one chat call, then embed.
      const std::string instruction =
          config.method == Method::hyde
              ? "Write a passage that answers the question: " + query.text
              : "Write a passage that answers the following query: " + query.text;
      const std::string passage = llm.chat(kBaselineSystemPrompt, instruction);
      run.chat_calls = 1;
      run.timings.compress_ms = clock.lap_ms();

      if (config.method == Method::hyde) {
        final_embedding = mean_embedding(
            embedder.embed({prefix + query.text, prefix + passage}));
      } else {
        final_embedding = embedder.embed_one(prefix + query.text + " " + passage);
      }
      run.timings.embed_ms = clock.lap_ms();
    }

    run.hits = ctx.dense->search(final_embedding, config.k);
    run.timings.search_ms = clock.lap_ms();
  } catch (const std::exception& e) {
    run.failed = true;
    run.error = e.what();
    run.hits.clear();
  }
  return run;
}

std::vector<ScoredHit> run_query(const QueryRecord& query, const PipelineConfig& config,
                                 ChatClient& llm, Embedder& embedder, const SearchContext& ctx) {
  QueryRun run = run_query_traced(query, config, llm, embedder, ctx);
  if (run.failed) throw Error(ErrorKind::Protocol, "query " + query.query_id + ": " + run.error);
  return std::move(run.hits);
}

RunResult run_batch(const std::vector<QueryRecord>& queries, const PipelineConfig& config,
                    ChatClient& llm, Embedder& embedder, const SearchContext& ctx) {
  if (queries.empty()) {
    throw Error(ErrorKind::InvalidConfig, "run_batch requires at least one query");
  }
  config.validate();

  RunResult result;
  result.run_tag = config.run_tag.empty() ? to_string(config.method) : config.run_tag;
  result.entries.resize(queries.size());

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), queries.size());
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) {
      result.entries[i] = run_query_traced(queries[i], config, llm, embedder, ctx);
    }
    return result;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queries.size()) return;
      result.entries[i] = run_query_traced(queries[i], config, llm, embedder, ctx);
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  return result;
}

std::string render_run_file(const RunResult& result) {
  std::string out;
  char score_buf[64];
  for (const QueryRun& entry : result.entries) {
    if (entry.failed) continue;
    for (const ScoredHit& hit : entry.hits) {
      std::snprintf(score_buf, sizeof score_buf, "%.6f", hit.score);
      out += entry.query_id;
      out += " Q0 ";
      out += hit.passage_id;
      out += ' ';
      out += std::to_string(hit.rank);
      out += ' ';
      out += score_buf;
      out += ' ';
      out += result.run_tag;
      out.push_back('\n');
    }
  }
  return out;
}

void write_run_file(const RunResult& result, const std::string& path) {
  write_file(path, render_run_file(result));
}

void write_trace_file(const RunResult& result, const std::string& path,
                      const std::string& config_echo_json, bool include_timings) {
  std::string lines;
  json echo_line;
  json echo = json::parse(config_echo_json, nullptr, false);
  echo_line["config"] = echo.is_discarded() ? json(config_echo_json) : echo;
  echo_line["run_tag"] = result.run_tag;
  lines += echo_line.dump();
  lines.push_back('\n');

  for (const QueryRun& entry : result.entries) {
    json row;
    row["query_id"] = entry.query_id;
    if (entry.failed) {
      row["error"] = entry.error;
      lines += row.dump();
      lines.push_back('\n');
      continue;
    }
    row["sub_queries"] = entry.sub_queries;
    row["candidates"] = entry.candidates;
    row["compressed"] = entry.compressed_texts;
    row["chat_calls"] = entry.chat_calls;
    row["bm25_calls"] = entry.bm25_calls;
    row["timing_ms"] = {
        {"decompose", include_timings ? entry.timings.decompose_ms : 0.0},
        {"retrieve", include_timings ? entry.timings.retrieve_ms : 0.0},
        {"compress", include_timings ? entry.timings.compress_ms : 0.0},
        {"embed", include_timings ? entry.timings.embed_ms : 0.0},
        {"search", include_timings ? entry.timings.search_ms : 0.0},
    };
    json hits = json::array();
    for (const ScoredHit& hit : entry.hits) {
      hits.push_back({{"id", hit.passage_id}, {"rank", hit.rank}, {"score", hit.score}});
    }
    row["hits"] = std::move(hits);
    lines += row.dump();
    lines.push_back('\n');
  }
  write_file(path, lines);
}

}  // namespace decor
