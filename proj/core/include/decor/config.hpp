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

#include <string>
#include <vector>

#include "decor/bm25.hpp"
#include "decor/corpus.hpp"
#include "decor/embedding.hpp"
#include "decor/eval.hpp"
#include "decor/llm.hpp"
#include "decor/pipeline.hpp"

namespace decor {

struct CorpusOptions {
  CorpusFormat format = CorpusFormat::multihop_rag;
  int chunk_size = 256;  // words; 0 = whole-document passages
  int overlap = 32;      // words
  FactMatcher matcher = FactMatcher::normalized_substring;
  std::vector<std::string> question_types;  // empty keeps every query
};

/// Everything a command needs, loadable from one JSON file. Secrets never
/// appear here; the API key comes from the DECOR_API_KEY environment
/// variable only.
struct AppConfig {
  std::string corpus_path;
  std::string queries_path;
  std::string workdir = "workdir";

  CorpusOptions corpus;
  Bm25Params bm25;
  EmbedderConfig embedder;
  ChatClientConfig llm;
  PipelineConfig pipeline;
  MetricSpec eval;
};

// Parses the JSON config file; every complaint carries the offending key
// path (e.g. "pipeline.n: must be >= 1").
AppConfig load_app_config(const std::string& path);
AppConfig parse_app_config(const std::string& json_text);

// The effective configuration as canonical JSON, echoed into run traces.
std::string config_echo_json(const AppConfig& config);

}  // namespace decor
