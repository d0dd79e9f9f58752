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

#include "decor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"

namespace decor {

namespace {

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ' ' || c == '\t') {
      if (!current.empty()) {
        fields.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) fields.push_back(std::move(current));
  return fields;
}

// Queries eligible for evaluation: at least one gold passage.
std::vector<const std::string*> evaluated_queries(const Qrels& qrels) {
  std::vector<const std::string*> out;
  for (const auto& [query_id, gold] : qrels.gold) {
    if (!gold.empty()) out.push_back(&query_id);
  }
  return out;
}

const std::vector<ScoredHit>& ranking_or_empty(const RunFileData& run,
                                               const std::string& query_id) {
  static const std::vector<ScoredHit> empty;
  auto it = run.rankings.find(query_id);
  return it == run.rankings.end() ? empty : it->second;
}

void check_run_queries_known(const RunFileData& run, const Qrels& qrels) {
  for (const std::string& query_id : run.query_order) {
    if (qrels.gold.find(query_id) == qrels.gold.end()) {
      throw Error(ErrorKind::UnknownQuery,
                  "run contains query '" + query_id + "' absent from the qrels");
    }
  }
}

std::string format_pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  return buf;
}

}  // namespace

RunFileData load_run_file(const std::string& path) {
  RunFileData data;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    const std::vector<std::string> fields = split_ws(line);
    if (fields.size() != 6) {
      throw Error(ErrorKind::MalformedRunFile,
                  "line " + std::to_string(line_no) + ": expected 6 columns, got " +
                      std::to_string(fields.size()));
    }
    ScoredHit hit;
    hit.passage_id = fields[2];
    try {
      hit.rank = std::stoi(fields[3]);
      hit.score = std::stod(fields[4]);
    } catch (const std::exception&) {
      throw Error(ErrorKind::MalformedRunFile,
                  "line " + std::to_string(line_no) + ": non-numeric rank or score");
    }
    const std::string& query_id = fields[0];
    auto [it, inserted] = data.rankings.try_emplace(query_id);
    if (inserted) data.query_order.push_back(query_id);
    if (hit.rank != static_cast<int>(it->second.size()) + 1) {
      throw Error(ErrorKind::MalformedRunFile,
                  "line " + std::to_string(line_no) + ": rank " + std::to_string(hit.rank) +
                      " breaks the 1..n sequence for query '" + query_id + "'");
    }
    if (data.run_tag.empty()) data.run_tag = fields[5];
    it->second.push_back(std::move(hit));
  });
  return data;
}

double hits_at_k(const RunFileData& run, const Qrels& qrels, int k, HitsVariant variant) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "hits@k requires k >= 1");
  check_run_queries_known(run, qrels);

  const auto queries = evaluated_queries(qrels);
  if (queries.empty()) return 0.0;

  std::size_t matched_pairs = 0, total_pairs = 0, queries_with_hit = 0;
  for (const std::string* query_id : queries) {
    const auto& gold = qrels.gold.at(*query_id);
    const auto& ranking = ranking_or_empty(run, *query_id);
    std::size_t found = 0;
    for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i) {
      if (gold.count(ranking[i].passage_id) > 0) ++found;
    }
    matched_pairs += found;
    total_pairs += gold.size();
    if (found > 0) ++queries_with_hit;
  }
  if (variant == HitsVariant::micro) {
    return static_cast<double>(matched_pairs) / static_cast<double>(total_pairs);
  }
  return static_cast<double>(queries_with_hit) / static_cast<double>(queries.size());
}

double map_at_k(const RunFileData& run, const Qrels& qrels, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "map@k requires k >= 1");
  check_run_queries_known(run, qrels);

  const auto queries = evaluated_queries(qrels);
  if (queries.empty()) return 0.0;

  double sum_ap = 0.0;
  for (const std::string* query_id : queries) {
    const auto& gold = qrels.gold.at(*query_id);
    const auto& ranking = ranking_or_empty(run, *query_id);
    double precision_sum = 0.0;
    std::size_t hits_so_far = 0;
    for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i) {
      if (gold.count(ranking[i].passage_id) > 0) {
        ++hits_so_far;
        precision_sum += static_cast<double>(hits_so_far) / static_cast<double>(i + 1);
      }
    }
    const double denom = static_cast<double>(
        std::min<std::size_t>(gold.size(), static_cast<std::size_t>(k)));
    sum_ap += precision_sum / denom;
  }
  return sum_ap / static_cast<double>(queries.size());
}

double mrr_at_k(const RunFileData& run, const Qrels& qrels, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "mrr@k requires k >= 1");
  check_run_queries_known(run, qrels);

  const auto queries = evaluated_queries(qrels);
  if (queries.empty()) return 0.0;

  double sum_rr = 0.0;
  for (const std::string* query_id : queries) {
    const auto& gold = qrels.gold.at(*query_id);
    const auto& ranking = ranking_or_empty(run, *query_id);
    for (std::size_t i = 0; i < ranking.size() && i < static_cast<std::size_t>(k); ++i) {
      if (gold.count(ranking[i].passage_id) > 0) {
        sum_rr += 1.0 / static_cast<double>(i + 1);
        break;
      }
    }
  }
  return sum_rr / static_cast<double>(queries.size());
}

MetricReport evaluate(const RunFileData& run, const Qrels& qrels, const MetricSpec& spec) {
  MetricReport report;
  report.run_tag = run.run_tag;
  report.hits_variant = spec.hits_variant == HitsVariant::micro ? "micro" : "macro";
  report.num_ranked_queries = run.query_order.size();
  report.definitions =
      "hits@k: " + report.hits_variant +
      (spec.hits_variant == HitsVariant::micro
           ? " (gold pairs found in top-k / total gold pairs)"
           : " (fraction of queries with any gold passage in top-k)") +
      "; map@k: mean of sum(precision@hit)/min(|gold|,k); mrr@k: mean reciprocal rank of "
      "first gold in top-k, else 0";

  for (const auto& [query_id, gold] : qrels.gold) {
    if (gold.empty()) continue;
    ++report.num_queries;
    report.num_gold += gold.size();
  }

  for (int k : spec.hits_ks) {
    report.metrics.emplace_back("hits@" + std::to_string(k),
                                hits_at_k(run, qrels, k, spec.hits_variant));
  }
  for (int k : spec.map_ks) {
    report.metrics.emplace_back("map@" + std::to_string(k), map_at_k(run, qrels, k));
  }
  for (int k : spec.mrr_ks) {
    report.metrics.emplace_back("mrr@" + std::to_string(k), mrr_at_k(run, qrels, k));
  }

  if (spec.per_query) {
    for (const auto& [query_id, gold] : qrels.gold) {
      if (gold.empty()) continue;
      RunFileData single;
      single.run_tag = run.run_tag;
      single.query_order.push_back(query_id);
      single.rankings[query_id] = ranking_or_empty(run, query_id);
      Qrels single_qrels;
      single_qrels.gold[query_id] = gold;
      auto& row = report.per_query[query_id];
      for (int k : spec.hits_ks) {
        row["hits@" + std::to_string(k)] =
            hits_at_k(single, single_qrels, k, spec.hits_variant);
      }
      for (int k : spec.map_ks) {
        row["map@" + std::to_string(k)] = map_at_k(single, single_qrels, k);
      }
      for (int k : spec.mrr_ks) {
        row["mrr@" + std::to_string(k)] = mrr_at_k(single, single_qrels, k);
      }
    }
  }
  return report;
}

std::string render_report_text(const MetricReport& report) {
  std::ostringstream out;
  out << "run: " << report.run_tag << "\n";
  out << "queries evaluated: " << report.num_queries << " (" << report.num_gold
      << " gold pairs, " << report.num_ranked_queries << " queries ranked)\n";
  out << "hits variant: " << report.hits_variant << "\n";
  for (const auto& [name, value] : report.metrics) {
    out << "  " << name << ": " << format_pct(value) << "\n";
  }
  return out.str();
}

std::string render_comparison_text(const std::vector<MetricReport>& reports) {
  if (reports.empty()) return "";

  std::vector<std::string> columns;
  for (const auto& [name, value] : reports.front().metrics) columns.push_back(name);

  // Best value per metric column gets a '*' marker.
  std::map<std::string, double> best;
  for (const MetricReport& report : reports) {
    for (const auto& [name, value] : report.metrics) {
      auto it = best.find(name);
      if (it == best.end() || value > it->second) best[name] = value;
    }
  }

  std::size_t tag_width = 3;
  for (const MetricReport& report : reports) tag_width = std::max(tag_width, report.run_tag.size());

  std::ostringstream out;
  out << std::string(tag_width, ' ');
  for (const std::string& column : columns) {
    out << "  " << column << std::string(column.size() < 9 ? 9 - column.size() : 1, ' ');
  }
  out << "\n";
  for (const MetricReport& report : reports) {
    out << report.run_tag << std::string(tag_width - report.run_tag.size(), ' ');
    for (const std::string& column : columns) {
      double value = 0.0;
      for (const auto& [name, v] : report.metrics) {
        if (name == column) value = v;
      }
      std::string cell = format_pct(value);
      if (value == best[column]) cell += "*";
      out << "  " << cell << std::string(cell.size() < 9 ? 9 - cell.size() : 1, ' ');
    }
    out << "\n";
  }
  return out.str();
}

std::string render_comparison_csv(const std::vector<MetricReport>& reports) {
  if (reports.empty()) return "";
  std::ostringstream out;
  out << "run_tag";
  for (const auto& [name, value] : reports.front().metrics) out << "," << name;
  out << "\n";
  for (const MetricReport& report : reports) {
    out << report.run_tag;
    for (const auto& [name, value] : report.metrics) out << "," << format_pct(value);
    out << "\n";
  }
  return out.str();
}

}  // namespace decor
