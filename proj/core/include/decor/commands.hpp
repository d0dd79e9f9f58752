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

#include "decor/config.hpp"
#include "decor/eval.hpp"

namespace decor {

/// Location of every artifact a workdir can hold.
struct ArtifactPaths {
  explicit ArtifactPaths(const std::string& workdir);

  std::string corpus_header;
  std::string passages;
  std::string queries;
  std::string qrels;
  std::string unmatched;
  std::string bm25_index;
  std::string vector_index;
  std::string embedding_cache;

  std::string run_file(const std::string& tag) const;
  std::string trace_file(const std::string& tag) const;
  std::string report_text(const std::string& tag) const;
  std::string report_csv(const std::string& tag) const;

 private:
  std::string workdir_;
};

struct IngestSummary {
  std::size_t num_docs = 0;
  std::size_t num_passages = 0;
  std::size_t num_queries = 0;
  std::size_t num_gold_pairs = 0;
  std::size_t num_unmatched_facts = 0;
};

struct IndexSummary {
  std::size_t num_passages = 0;
  std::size_t vocabulary_terms = 0;
  std::size_t dim = 0;
};

struct RunSummary {
  std::string run_tag;
  std::string run_path;
  std::string trace_path;
  std::size_t num_queries = 0;
  std::size_t num_failures = 0;
};

struct EvalSummary {
  std::vector<MetricReport> reports;
  std::string table_text;  // single report or comparison table
  std::string report_text_path;
  std::string report_csv_path;
};

// The four operator commands. All throw decor::Error; MissingArtifact names
// the exact file a prerequisite step should have produced.
IngestSummary cmd_ingest(const AppConfig& config);
IndexSummary cmd_index(const AppConfig& config);
RunSummary cmd_run(const AppConfig& config);
EvalSummary cmd_eval(const AppConfig& config, const std::vector<std::string>& run_paths,
                     const std::string& qrels_path = "");

}  // namespace decor
