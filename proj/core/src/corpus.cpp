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

#include "decor/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/io_util.hpp"
#include "decor/tokenize.hpp"

namespace decor {

using nlohmann::json;

namespace {

constexpr int kStoreFormatVersion = 1;

std::string ordinal_id(char prefix, std::size_t index, std::size_t count) {
  std::size_t width = 1;
  for (std::size_t v = count > 0 ? count - 1 : 0; v >= 10; v /= 10) ++width;
  width = std::max<std::size_t>(width, 3);
  std::string digits = std::to_string(index);
  std::string out(1, prefix);
  out.append(width > digits.size() ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

std::string stringify(const json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

json parse_json_or_throw(const std::string& text, const std::string& what) {
  json parsed = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) {
    throw Error(ErrorKind::MalformedInput, what + ": not valid JSON");
  }
  return parsed;
}

}  // namespace

std::vector<Document> parse_corpus(const std::string& json_text, CorpusFormat format) {
  json root = parse_json_or_throw(json_text, "corpus");
  if (!root.is_array()) {
    throw Error(ErrorKind::MalformedInput, "corpus: top-level value is not a JSON array");
  }

  static const std::vector<std::string> known = {
      "doc_id", "id", "title", "body", "text", "source", "published_at", "category"};

  std::vector<Document> docs;
  docs.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& element = root[i];
    if (!element.is_object()) {
      throw Error(ErrorKind::MalformedInput,
                  "corpus element " + std::to_string(i) + ": not a JSON object");
    }
    Document doc;
    if (element.contains("doc_id")) {
      doc.doc_id = stringify(element["doc_id"]);
    } else if (element.contains("id")) {
      doc.doc_id = stringify(element["id"]);
    }
    if (element.contains("title")) doc.title = stringify(element["title"]);
    if (element.contains("body")) {
      doc.body = stringify(element["body"]);
    } else if (format == CorpusFormat::generic_json && element.contains("text")) {
      doc.body = stringify(element["text"]);
    }
    if (element.contains("source")) doc.source = stringify(element["source"]);
    if (element.contains("published_at")) doc.published_at = stringify(element["published_at"]);
    if (element.contains("category")) doc.category = stringify(element["category"]);
    for (const auto& [key, value] : element.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        doc.extra[key] = stringify(value);
      }
    }
    if (normalize_whitespace(doc.body).empty()) {
      throw Error(ErrorKind::MalformedInput,
                  "corpus element " + std::to_string(i) + ": missing or empty body");
    }
    docs.push_back(std::move(doc));
  }

  // Ordinal ids for elements that carried none, then uniqueness across all.
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].doc_id.empty()) docs[i].doc_id = ordinal_id('d', i, docs.size());
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!seen.insert(docs[i].doc_id).second) {
      throw Error(ErrorKind::MalformedInput,
                  "corpus element " + std::to_string(i) + ": duplicate doc_id '" +
                      docs[i].doc_id + "'");
    }
  }
  return docs;
}

std::vector<Document> ingest_corpus(const std::string& path, CorpusFormat format) {
  return parse_corpus(read_file(path), format);
}

std::string documents_to_json(const std::vector<Document>& docs) {
  json out = json::array();
  for (const Document& doc : docs) {
    json obj;
    obj["doc_id"] = doc.doc_id;
    obj["title"] = doc.title;
    obj["body"] = doc.body;
    if (!doc.source.empty()) obj["source"] = doc.source;
    if (!doc.published_at.empty()) obj["published_at"] = doc.published_at;
    if (!doc.category.empty()) obj["category"] = doc.category;
    for (const auto& [key, value] : doc.extra) obj[key] = value;
    out.push_back(std::move(obj));
  }
  return out.dump(1);
}

std::vector<QueryRecord> load_queries(const std::string& path) {
  json root = parse_json_or_throw(read_file(path), "queries");
  if (!root.is_array()) {
    throw Error(ErrorKind::MalformedInput, "queries: top-level value is not a JSON array");
  }
  std::vector<QueryRecord> queries;
  queries.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const json& element = root[i];
    if (!element.is_object()) {
      throw Error(ErrorKind::MalformedInput,
                  "queries element " + std::to_string(i) + ": not a JSON object");
    }
    QueryRecord record;
    if (element.contains("query_id")) {
      record.query_id = stringify(element["query_id"]);
    } else if (element.contains("id")) {
      record.query_id = stringify(element["id"]);
    }
    if (element.contains("query")) {
      record.text = stringify(element["query"]);
    } else if (element.contains("text")) {
      record.text = stringify(element["text"]);
    }
    if (element.contains("question_type")) record.question_type = stringify(element["question_type"]);
    if (record.text.empty()) {
      throw Error(ErrorKind::MalformedInput,
                  "queries element " + std::to_string(i) + ": missing or empty query text");
    }
    if (element.contains("evidence_list")) {
      const json& evidence = element["evidence_list"];
      if (!evidence.is_array()) {
        throw Error(ErrorKind::MalformedInput,
                    "queries element " + std::to_string(i) + ": evidence_list is not an array");
      }
      for (std::size_t j = 0; j < evidence.size(); ++j) {
        const json& entry = evidence[j];
        if (!entry.is_object() || !entry.contains("fact")) {
          throw Error(ErrorKind::MalformedInput, "queries element " + std::to_string(i) +
                                                     ": evidence entry " + std::to_string(j) +
                                                     " has no fact");
        }
        EvidenceFact fact;
        fact.fact = stringify(entry["fact"]);
        if (entry.contains("title")) fact.source_title = stringify(entry["title"]);
        record.gold_evidence.push_back(std::move(fact));
      }
    }
    queries.push_back(std::move(record));
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (queries[i].query_id.empty()) queries[i].query_id = ordinal_id('q', i, queries.size());
  }
  return queries;
}

std::vector<Passage> chunk_document(const Document& doc, int chunk_size, int overlap) {
  if (chunk_size != 0 && (overlap < 0 || chunk_size <= overlap)) {
    throw Error(ErrorKind::InvalidConfig,
                "chunk_size must exceed overlap >= 0 (got " + std::to_string(chunk_size) + "/" +
                    std::to_string(overlap) + ")");
  }

  std::vector<std::string> words;
  {
    std::istringstream in{doc.body};
    std::string word;
    while (in >> word) words.push_back(std::move(word));
  }
  std::vector<Passage> out;
  if (words.empty()) return out;

  auto emit = [&](std::size_t begin, std::size_t end) {
    Passage p;
    p.position = static_cast<int>(out.size());
    p.doc_id = doc.doc_id;
    p.passage_id = doc.doc_id + "#" + std::to_string(p.position);
    std::string text;
    for (std::size_t w = begin; w < end; ++w) {
      if (!text.empty()) text.push_back(' ');
      text += words[w];
    }
    p.text = std::move(text);
    out.push_back(std::move(p));
  };

  if (chunk_size == 0) {
    emit(0, words.size());
    return out;
  }

  const std::size_t size = static_cast<std::size_t>(chunk_size);
  const std::size_t stride = static_cast<std::size_t>(chunk_size - overlap);
  std::size_t start = 0;
  while (true) {
    std::size_t end = std::min(start + size, words.size());
    emit(start, end);
    if (start + size >= words.size()) break;  // this window consumed the tail
    start += stride;
  }
  return out;
}

QrelsResult build_qrels(const std::vector<QueryRecord>& queries,
                        const std::vector<Passage>& passages, FactMatcher matcher) {
  if (passages.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "build_qrels requires at least one passage");
  }
  std::vector<std::string> normalized;
  if (matcher == FactMatcher::normalized_substring) {
    normalized.reserve(passages.size());
    for (const Passage& p : passages) normalized.push_back(normalize_for_match(p.text));
  }

  QrelsResult result;
  for (const QueryRecord& query : queries) {
    auto& gold = result.qrels.gold[query.query_id];
    for (const EvidenceFact& fact : query.gold_evidence) {
      std::string needle = matcher == FactMatcher::normalized_substring
                               ? normalize_for_match(fact.fact)
                               : fact.fact;
      bool matched = false;
      for (std::size_t i = 0; i < passages.size(); ++i) {
        const std::string& haystack =
            matcher == FactMatcher::normalized_substring ? normalized[i] : passages[i].text;
        if (!needle.empty() && haystack.find(needle) != std::string::npos) {
          gold.insert(passages[i].passage_id);
          matched = true;
        }
      }
      if (!matched) {
        result.unmatched.push_back({query.query_id, fact.fact, fact.source_title});
      }
    }
  }
  return result;
}

PassageStore::PassageStore(std::vector<Passage> passages, int chunk_size, int overlap)
    : passages_(std::move(passages)), chunk_size_(chunk_size), overlap_(overlap) {
  std::set<std::string> docs;
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    index_.emplace(passages_[i].passage_id, i);
    docs.insert(passages_[i].doc_id);
  }
  if (index_.size() != passages_.size()) {
    throw Error(ErrorKind::MalformedInput, "duplicate passage_id in store");
  }
  num_docs_ = static_cast<int>(docs.size());
}

const Passage* PassageStore::find(std::string_view passage_id) const {
  auto it = index_.find(passage_id);
  return it == index_.end() ? nullptr : &passages_[it->second];
}

const Passage& PassageStore::at(std::string_view passage_id) const {
  const Passage* p = find(passage_id);
  if (p == nullptr) {
    throw Error(ErrorKind::MissingArtifact,
                "passage '" + std::string(passage_id) + "' not present in store");
  }
  return *p;
}

void save_passage_store(const PassageStore& store, const std::string& header_path,
                        const std::string& passages_path) {
  json header = {{"format_version", kStoreFormatVersion},
                 {"chunk_size", store.chunk_size()},
                 {"overlap", store.overlap()},
                 {"num_docs", store.num_docs()},
                 {"num_passages", store.size()}};
  write_file(header_path, header.dump(1) + "\n");

  std::string lines;
  for (const Passage& p : store.passages()) {
    json row = {{"passage_id", p.passage_id},
                {"doc_id", p.doc_id},
                {"position", p.position},
                {"text", p.text}};
    lines += row.dump();
    lines.push_back('\n');
  }
  write_file(passages_path, lines);
}

PassageStore load_passage_store(const std::string& header_path,
                                const std::string& passages_path) {
  json header = parse_json_or_throw(read_file(header_path), "corpus header");
  if (!header.is_object() || !header.contains("format_version")) {
    throw Error(ErrorKind::Corrupt, "corpus header: missing format_version");
  }
  if (header["format_version"].get<int>() != kStoreFormatVersion) {
    throw Error(ErrorKind::VersionMismatch,
                "corpus store format_version " + header["format_version"].dump());
  }

  std::vector<Passage> passages;
  for_each_line(passages_path, [&](std::string_view line, std::size_t line_no) {
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::Corrupt,
                  "passage store line " + std::to_string(line_no) + ": bad JSON");
    }
    Passage p;
    p.passage_id = row.at("passage_id").get<std::string>();
    p.doc_id = row.at("doc_id").get<std::string>();
    p.position = row.at("position").get<int>();
    p.text = row.at("text").get<std::string>();
    passages.push_back(std::move(p));
  });
  if (header.contains("num_passages") &&
      header["num_passages"].get<std::size_t>() != passages.size()) {
    throw Error(ErrorKind::Corrupt, "passage store: header count " +
                                        header["num_passages"].dump() + " != " +
                                        std::to_string(passages.size()) + " rows");
  }
  return PassageStore(std::move(passages), header.value("chunk_size", 0),
                      header.value("overlap", 0));
}

void save_queries(const std::vector<QueryRecord>& queries, const std::string& path) {
  std::string lines;
  for (const QueryRecord& q : queries) {
    json evidence = json::array();
    for (const EvidenceFact& f : q.gold_evidence) {
      evidence.push_back({{"fact", f.fact}, {"title", f.source_title}});
    }
    json row = {{"query_id", q.query_id},
                {"text", q.text},
                {"question_type", q.question_type},
                {"evidence", std::move(evidence)}};
    lines += row.dump();
    lines.push_back('\n');
  }
  write_file(path, lines);
}

std::vector<QueryRecord> load_saved_queries(const std::string& path) {
  std::vector<QueryRecord> queries;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::Corrupt, "query store line " + std::to_string(line_no) + ": bad JSON");
    }
    QueryRecord q;
    q.query_id = row.at("query_id").get<std::string>();
    q.text = row.at("text").get<std::string>();
    q.question_type = row.value("question_type", "");
    for (const json& entry : row.value("evidence", json::array())) {
      q.gold_evidence.push_back({entry.at("fact").get<std::string>(), entry.value("title", "")});
    }
    queries.push_back(std::move(q));
  });
  return queries;
}

void save_qrels(const Qrels& qrels, const std::string& path) {
  std::string lines;
  for (const auto& [query_id, gold] : qrels.gold) {
    for (const std::string& passage_id : gold) {
      lines += query_id;
      lines.push_back(' ');
      lines += passage_id;
      lines.push_back('\n');
    }
  }
  write_file(path, lines);
}

Qrels load_qrels(const std::string& path) {
  Qrels qrels;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    auto space = line.find(' ');
    if (space == std::string_view::npos || space == 0 || space + 1 >= line.size() ||
        line.find(' ', space + 1) != std::string_view::npos) {
      throw Error(ErrorKind::MalformedInput,
                  "qrels line " + std::to_string(line_no) + ": expected 'query_id passage_id'");
    }
    qrels.gold[std::string(line.substr(0, space))].insert(std::string(line.substr(space + 1)));
  });
  return qrels;
}

void save_unmatched_report(const std::vector<UnmatchedFact>& unmatched,
                           const std::string& path) {
  std::string lines;
  for (const UnmatchedFact& f : unmatched) {
    json row = {{"query_id", f.query_id}, {"fact", f.fact}, {"title", f.source_title}};
    lines += row.dump();
    lines.push_back('\n');
  }
  write_file(path, lines);
}

}  // namespace decor
