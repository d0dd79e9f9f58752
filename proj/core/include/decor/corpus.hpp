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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace decor {

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::string source;
  std::string published_at;
  std::string category;
  std::map<std::string, std::string> extra;  // unrecognized input fields, preserved
};

struct Passage {
  std::string passage_id;  // doc_id + "#" + zero-based chunk ordinal
  std::string doc_id;
  std::string text;
  int position = 0;
};

struct EvidenceFact {
  std::string fact;
  std::string source_title;
};

struct QueryRecord {
  std::string query_id;
  std::string text;
  std::string question_type;
  std::vector<EvidenceFact> gold_evidence;
};

struct Qrels {
  std::map<std::string, std::set<std::string>> gold;  // query_id -> gold passage ids

  bool relevant(const std::string& query_id, const std::string& passage_id) const {
    auto it = gold.find(query_id);
    return it != gold.end() && it->second.count(passage_id) > 0;
  }
};

struct UnmatchedFact {
  std::string query_id;
  std::string fact;
  std::string source_title;
};

struct QrelsResult {
  Qrels qrels;
  std::vector<UnmatchedFact> unmatched;
};

enum class CorpusFormat { multihop_rag, generic_json };
enum class FactMatcher { normalized_substring, exact };

// Parses a JSON array of document objects. Assigns zero-padded ordinal ids
// ("d000", ...) to elements with no id field. Unrecognized fields land in
// Document::extra.
std::vector<Document> ingest_corpus(const std::string& path, CorpusFormat format);
std::vector<Document> parse_corpus(const std::string& json_text, CorpusFormat format);
std::string documents_to_json(const std::vector<Document>& docs);

// Query file loader (MultiHop-RAG layout: query / question_type /
// evidence_list). Assigns "q000"-style ids when the file carries none.
std::vector<QueryRecord> load_queries(const std::string& path);

// Sliding word-window chunker. chunk_size == 0 is the whole-document
// sentinel: one passage spanning the full body. Otherwise requires
// chunk_size > overlap >= 0.
std::vector<Passage> chunk_document(const Document& doc, int chunk_size, int overlap);

// Aligns evidence facts with passages. A fact is gold for every passage
// whose normalized text contains the normalized fact text (or the raw text,
// for FactMatcher::exact). Facts matching nothing are reported, not dropped.
QrelsResult build_qrels(const std::vector<QueryRecord>& queries,
                        const std::vector<Passage>& passages, FactMatcher matcher);

/// Immutable passage collection with id lookup, shared by both indexes.
class PassageStore {
 public:
  PassageStore() = default;
  PassageStore(std::vector<Passage> passages, int chunk_size, int overlap);

  const std::vector<Passage>& passages() const { return passages_; }
  const Passage* find(std::string_view passage_id) const;
  const Passage& at(std::string_view passage_id) const;  // throws MissingArtifact
  std::size_t size() const { return passages_.size(); }
  int chunk_size() const { return chunk_size_; }
  int overlap() const { return overlap_; }
  int num_docs() const { return num_docs_; }

 private:
  std::vector<Passage> passages_;
  std::map<std::string, std::size_t, std::less<>> index_;
  int chunk_size_ = 0;
  int overlap_ = 0;
  int num_docs_ = 0;
};

// Corpus store on disk: a JSON header next to a JSON-lines passage file.
void save_passage_store(const PassageStore& store, const std::string& header_path,
                        const std::string& passages_path);
PassageStore load_passage_store(const std::string& header_path,
                                const std::string& passages_path);

void save_queries(const std::vector<QueryRecord>& queries, const std::string& path);
std::vector<QueryRecord> load_saved_queries(const std::string& path);

// Qrels file: one "query_id passage_id" pair per line.
void save_qrels(const Qrels& qrels, const std::string& path);
Qrels load_qrels(const std::string& path);

void save_unmatched_report(const std::vector<UnmatchedFact>& unmatched,
                           const std::string& path);

}  // namespace decor
