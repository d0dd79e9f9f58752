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

#include <map>
#include <string>
#include <vector>

#include "decor/corpus.hpp"
#include "decor/hit.hpp"

namespace decor {

/// Parsed TREC run file: per-query rankings in file order.
struct RunFileData {
  std::string run_tag;
  std::vector<std::string> query_order;  // first-appearance order
  std::map<std::string, std::vector<ScoredHit>> rankings;
};

RunFileData load_run_file(const std::string& path);

// Hits@k comes in two averaging flavors. micro (the default) is
// evidence-level recall: matched (query, gold) pairs over all gold pairs.
// macro is query-level: the fraction of queries with at least one gold
// passage in the top k. Reports always name the variant used.
enum class HitsVariant { micro, macro };

// All metrics average over the qrels queries that carry at least one gold
// passage; queries absent from the run count as retrieving nothing. A run
// query missing from the qrels raises UnknownQuery.
double hits_at_k(const RunFileData& run, const Qrels& qrels, int k,
                 HitsVariant variant = HitsVariant::micro);
double map_at_k(const RunFileData& run, const Qrels& qrels, int k);
double mrr_at_k(const RunFileData& run, const Qrels& qrels, int k);

struct MetricReport {
  std::string run_tag;
  std::vector<std::pair<std::string, double>> metrics;  // e.g. {"hits@10", 0.72}
  std::size_t num_queries = 0;  // evaluated queries (>= 1 gold passage)
  std::size_t num_gold = 0;     // total gold pairs
  std::size_t num_ranked_queries = 0;  // queries present in the run file
  std::string hits_variant;
  std::string definitions;  // records the exact metric definitions used
  std::map<std::string, std::map<std::string, double>> per_query;  // optional
};

struct MetricSpec {
  std::vector<int> hits_ks = {10, 4};
  std::vector<int> map_ks = {10};
  std::vector<int> mrr_ks = {10};
  HitsVariant hits_variant = HitsVariant::micro;
  bool per_query = false;
};

MetricReport evaluate(const RunFileData& run, const Qrels& qrels, const MetricSpec& spec);

// Values are rendered x100 with two decimals; the best value per metric
// column is marked with '*' in the text table.
std::string render_report_text(const MetricReport& report);
std::string render_comparison_text(const std::vector<MetricReport>& reports);
std::string render_comparison_csv(const std::vector<MetricReport>& reports);

}  // namespace decor
