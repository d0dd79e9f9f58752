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

#include "decor/config.hpp"

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"

namespace decor {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::ConfigError, key + ": " + why);
}

class Section {
 public:
  Section(const json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {}

  bool has(const char* key) const { return node_.contains(key); }

  std::string path(const char* key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  std::string get_string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_string()) config_fail(path(key), "expected a string");
    return node_[key].get<std::string>();
  }

  int get_int(const char* key, int fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_number_integer()) config_fail(path(key), "expected an integer");
    return node_[key].get<int>();
  }

  double get_double(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_number()) config_fail(path(key), "expected a number");
    return node_[key].get<double>();
  }

  bool get_bool(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_boolean()) config_fail(path(key), "expected a boolean");
    return node_[key].get<bool>();
  }

  std::vector<int> get_int_list(const char* key, std::vector<int> fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_array()) config_fail(path(key), "expected an array of integers");
    std::vector<int> out;
    for (const json& item : node_[key]) {
      if (!item.is_number_integer()) config_fail(path(key), "expected an array of integers");
      out.push_back(item.get<int>());
    }
    return out;
  }

  std::vector<std::string> get_string_list(const char* key,
                                           std::vector<std::string> fallback) const {
    if (!has(key)) return fallback;
    if (!node_[key].is_array()) config_fail(path(key), "expected an array of strings");
    std::vector<std::string> out;
    for (const json& item : node_[key]) {
      if (!item.is_string()) config_fail(path(key), "expected an array of strings");
      out.push_back(item.get<std::string>());
    }
    return out;
  }

  Section child(const char* key) const {
    if (!has(key)) return Section(empty_object(), path(key));
    if (!node_[key].is_object()) config_fail(path(key), "expected an object");
    return Section(node_[key], path(key));
  }

 private:
  static const json& empty_object() {
    static const json empty = json::object();
    return empty;
  }

  const json& node_;
  std::string prefix_;
};

}  // namespace

AppConfig parse_app_config(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw Error(ErrorKind::ConfigError, "config: not a JSON object");
  }
  Section top(root, "");
  AppConfig config;

  Section paths = top.child("paths");
  config.corpus_path = paths.get_string("corpus", "");
  config.queries_path = paths.get_string("queries", "");
  config.workdir = paths.get_string("workdir", config.workdir);

  Section corpus = top.child("corpus");
  {
    const std::string format = corpus.get_string("format", "multihop_rag");
    if (format == "multihop_rag") {
      config.corpus.format = CorpusFormat::multihop_rag;
    } else if (format == "generic_json") {
      config.corpus.format = CorpusFormat::generic_json;
    } else {
      config_fail(corpus.path("format"), "expected multihop_rag or generic_json");
    }
    config.corpus.chunk_size = corpus.get_int("chunk_size", config.corpus.chunk_size);
    config.corpus.overlap = corpus.get_int("overlap", config.corpus.overlap);
    if (config.corpus.chunk_size < 0) config_fail(corpus.path("chunk_size"), "must be >= 0");
    if (config.corpus.chunk_size != 0 &&
        (config.corpus.overlap < 0 || config.corpus.overlap >= config.corpus.chunk_size)) {
      config_fail(corpus.path("overlap"), "must satisfy 0 <= overlap < chunk_size");
    }
    const std::string matcher = corpus.get_string("matcher", "normalized_substring");
    if (matcher == "normalized_substring") {
      config.corpus.matcher = FactMatcher::normalized_substring;
    } else if (matcher == "exact") {
      config.corpus.matcher = FactMatcher::exact;
    } else {
      config_fail(corpus.path("matcher"), "expected normalized_substring or exact");
    }
    config.corpus.question_types = corpus.get_string_list("question_types", {});
  }

  Section bm25 = top.child("bm25");
  config.bm25.k1 = bm25.get_double("k1", config.bm25.k1);
  config.bm25.b = bm25.get_double("b", config.bm25.b);
  if (!(config.bm25.k1 > 0.0)) config_fail(bm25.path("k1"), "must be > 0");
  if (config.bm25.b < 0.0 || config.bm25.b > 1.0) config_fail(bm25.path("b"), "must be in [0, 1]");

  Section embedder = top.child("embedder");
  {
    const std::string backend = embedder.get_string("backend", "mock_hashed_bow");
    if (backend == "http") {
      config.embedder.backend = EmbedderBackend::http;
    } else if (backend == "mock_hashed_bow") {
      config.embedder.backend = EmbedderBackend::mock_hashed_bow;
    } else {
      config_fail(embedder.path("backend"), "expected http or mock_hashed_bow");
    }
    config.embedder.endpoint_url = embedder.get_string("endpoint_url", "");
    config.embedder.model_name = embedder.get_string("model_name", "");
    config.embedder.dim = embedder.get_int("dim", config.embedder.dim);
    config.embedder.batch_size = embedder.get_int("batch_size", config.embedder.batch_size);
    config.embedder.max_concurrent =
        embedder.get_int("max_concurrent", config.embedder.max_concurrent);
    config.embedder.max_retries = embedder.get_int("max_retries", config.embedder.max_retries);
    config.embedder.retry_backoff_ms =
        embedder.get_int("retry_backoff_ms", config.embedder.retry_backoff_ms);
    config.embedder.query_prefix = embedder.get_string("query_prefix", "");
    config.embedder.passage_prefix = embedder.get_string("passage_prefix", "");
    config.embedder.cache_path = embedder.get_string("cache_path", "");
    if (config.embedder.backend == EmbedderBackend::http &&
        (config.embedder.endpoint_url.empty() || config.embedder.model_name.empty())) {
      config_fail(embedder.path("endpoint_url"),
                  "http backend requires endpoint_url and model_name");
    }
    if (config.embedder.backend == EmbedderBackend::mock_hashed_bow && config.embedder.dim < 2) {
      config_fail(embedder.path("dim"), "mock backend requires dim >= 2");
    }
    if (config.embedder.batch_size < 1) config_fail(embedder.path("batch_size"), "must be >= 1");
    if (config.embedder.max_concurrent < 1) {
      config_fail(embedder.path("max_concurrent"), "must be >= 1");
    }
  }

  Section llm = top.child("llm");
  {
    const std::string backend = llm.get_string("backend", "heuristic");
    if (backend == "http") {
      config.llm.backend = LlmBackend::http;
    } else if (backend == "scripted") {
      config.llm.backend = LlmBackend::scripted;
    } else if (backend == "heuristic") {
      config.llm.backend = LlmBackend::heuristic;
    } else {
      config_fail(llm.path("backend"), "expected http, scripted, or heuristic");
    }
    config.llm.endpoint_url = llm.get_string("endpoint_url", "");
    config.llm.model_name = llm.get_string("model_name", "");
    config.llm.transcript_path = llm.get_string("transcript_path", "");
    config.llm.record_transcript = llm.get_bool("record_transcript", false);
    config.llm.temperature = llm.get_double("temperature", 0.0);
    config.llm.max_tokens = llm.get_int("max_tokens", config.llm.max_tokens);
    config.llm.max_concurrent = llm.get_int("max_concurrent", config.llm.max_concurrent);
    config.llm.max_retries = llm.get_int("max_retries", config.llm.max_retries);
    config.llm.retry_backoff_ms = llm.get_int("retry_backoff_ms", config.llm.retry_backoff_ms);
    if (config.llm.backend == LlmBackend::http &&
        (config.llm.endpoint_url.empty() || config.llm.model_name.empty())) {
      config_fail(llm.path("endpoint_url"), "http backend requires endpoint_url and model_name");
    }
    if (config.llm.backend == LlmBackend::scripted && config.llm.transcript_path.empty()) {
      config_fail(llm.path("transcript_path"), "scripted backend requires a transcript");
    }
    if (config.llm.temperature < 0.0) config_fail(llm.path("temperature"), "must be >= 0");
  }

  Section pipeline = top.child("pipeline");
  {
    config.pipeline.method = method_from_string(pipeline.get_string("method", "decor"));
    config.pipeline.n = pipeline.get_int("n", config.pipeline.n);
    config.pipeline.k = pipeline.get_int("k", config.pipeline.k);
    config.pipeline.no_decomposition = pipeline.get_bool("no_decomposition", false);
    config.pipeline.no_compression = pipeline.get_bool("no_compression", false);
    config.pipeline.document_wise_compression =
        pipeline.get_bool("document_wise_compression", false);
    config.pipeline.concat_embedding = pipeline.get_bool("concat_embedding", false);
    config.pipeline.no_expansion = pipeline.get_bool("no_expansion", false);
    config.pipeline.workers = pipeline.get_int("workers", config.pipeline.workers);
    config.pipeline.run_tag = pipeline.get_string("run_tag", "");
    try {
      config.pipeline.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
  }

  Section eval = top.child("eval");
  {
    config.eval.hits_ks = eval.get_int_list("hits_ks", config.eval.hits_ks);
    config.eval.map_ks = eval.get_int_list("map_ks", config.eval.map_ks);
    config.eval.mrr_ks = eval.get_int_list("mrr_ks", config.eval.mrr_ks);
    const std::string variant = eval.get_string("hits_variant", "micro");
    if (variant == "micro") {
      config.eval.hits_variant = HitsVariant::micro;
    } else if (variant == "macro") {
      config.eval.hits_variant = HitsVariant::macro;
    } else {
      config_fail(eval.path("hits_variant"), "expected micro or macro");
    }
    config.eval.per_query = eval.get_bool("per_query", false);
    for (int k : config.eval.hits_ks) {
      if (k < 1) config_fail(eval.path("hits_ks"), "every k must be >= 1");
    }
    for (int k : config.eval.map_ks) {
      if (k < 1) config_fail(eval.path("map_ks"), "every k must be >= 1");
    }
    for (int k : config.eval.mrr_ks) {
      if (k < 1) config_fail(eval.path("mrr_ks"), "every k must be >= 1");
    }
  }

  return config;
}

AppConfig load_app_config(const std::string& path) {
  if (!file_exists(path)) {
    throw Error(ErrorKind::ConfigError, "config file '" + path + "' does not exist");
  }
  return parse_app_config(read_file(path));
}

std::string config_echo_json(const AppConfig& config) {
  json echo = {
      {"paths",
       {{"corpus", config.corpus_path},
        {"queries", config.queries_path},
        {"workdir", config.workdir}}},
      {"corpus",
       {{"format", config.corpus.format == CorpusFormat::multihop_rag ? "multihop_rag"
                                                                      : "generic_json"},
        {"chunk_size", config.corpus.chunk_size},
        {"overlap", config.corpus.overlap},
        {"matcher", config.corpus.matcher == FactMatcher::normalized_substring
                        ? "normalized_substring"
                        : "exact"},
        {"question_types", config.corpus.question_types}}},
      {"bm25", {{"k1", config.bm25.k1}, {"b", config.bm25.b}}},
      {"embedder",
       {{"backend",
         config.embedder.backend == EmbedderBackend::http ? "http" : "mock_hashed_bow"},
        {"endpoint_url", config.embedder.endpoint_url},
        {"model_name", config.embedder.model_name},
        {"dim", config.embedder.dim},
        {"batch_size", config.embedder.batch_size},
        {"max_concurrent", config.embedder.max_concurrent},
        {"query_prefix", config.embedder.query_prefix},
        {"passage_prefix", config.embedder.passage_prefix},
        {"cache_path", config.embedder.cache_path}}},
      {"llm",
       {{"backend", config.llm.backend == LlmBackend::http       ? "http"
                    : config.llm.backend == LlmBackend::scripted ? "scripted"
                                                                 : "heuristic"},
        {"endpoint_url", config.llm.endpoint_url},
        {"model_name", config.llm.model_name},
        {"transcript_path", config.llm.transcript_path},
        {"record_transcript", config.llm.record_transcript},
        {"temperature", config.llm.temperature},
        {"max_tokens", config.llm.max_tokens},
        {"max_concurrent", config.llm.max_concurrent}}},
      {"pipeline",
       {{"method", to_string(config.pipeline.method)},
        {"n", config.pipeline.n},
        {"k", config.pipeline.k},
        {"no_decomposition", config.pipeline.no_decomposition},
        {"no_compression", config.pipeline.no_compression},
        {"document_wise_compression", config.pipeline.document_wise_compression},
        {"concat_embedding", config.pipeline.concat_embedding},
        {"no_expansion", config.pipeline.no_expansion},
        {"workers", config.pipeline.workers},
        {"run_tag", config.pipeline.run_tag}}},
      {"eval",
       {{"hits_ks", config.eval.hits_ks},
        {"map_ks", config.eval.map_ks},
        {"mrr_ks", config.eval.mrr_ks},
        {"hits_variant", config.eval.hits_variant == HitsVariant::micro ? "micro" : "macro"},
        {"per_query", config.eval.per_query}}},
  };
  return echo.dump();
}

}  // namespace decor
