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

#include "decor/llm.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <semaphore>
#include <sstream>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/hash.hpp"
#include "decor/io_util.hpp"
#include "decor/tokenize.hpp"
#include "http_util.hpp"

namespace decor {

using nlohmann::json;

namespace prompts {

const std::string_view kDecomposition =
    R"(You are a helpful assistant that breaks down complex, multi-hop questions into a list of simpler, independent sub-queries. Each sub-query should reflect a single reasoning step and be answerable on its own.
If the question is already simple, return a Python-style list with just the original question.

Examples:
Question: When was the creator of The Painter's Studio born?
Sub-queries: ["Who created The Painter's Studio?", "When was the creator of The Painter's Studio born?"]

Question: What is the capital of Korea?
Sub-queries: ["What is the capital of Korea?"])";

const std::string_view kCompression =
    R"(You are a helpful assistant that concisely summarizes only the key information from the source documents that is relevant to answering the question.
Exclude unrelated content and avoid using pronouns.)";

const std::vector<std::string>& stopwords() {
  static const std::vector<std::string> list = {
      "the", "be",   "to", "of", "and", "a",  "in", "that", "have", "i",    "it",  "for", "not",
      "on",  "with", "he", "as", "you", "do", "at", "this", "but",  "his",  "by",  "from"};
  return list;
}

}  // namespace prompts

namespace {

constexpr std::size_t kFallbackWordCap = 50;

std::string trim_copy(std::string_view text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

// Breaks text at ./!/? boundaries, keeping the terminator with the sentence.
std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  std::string current;
  for (char c : text) {
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      std::string s = trim_copy(current);
      if (!s.empty()) sentences.push_back(std::move(s));
      current.clear();
    }
  }
  std::string tail = trim_copy(current);
  if (!tail.empty()) sentences.push_back(std::move(tail));
  return sentences;
}

std::string first_words(std::string_view text, std::size_t count) {
  std::istringstream in{std::string(text)};
  std::string word, out;
  std::size_t taken = 0;
  while (taken < count && in >> word) {
    if (!out.empty()) out.push_back(' ');
    out += word;
    ++taken;
  }
  return out;
}

}  // namespace

std::uint64_t ChatClient::request_hash(std::string_view system_prompt,
                                       std::string_view user_prompt) {
  std::string keyed;
  keyed.reserve(system_prompt.size() + user_prompt.size() + 1);
  keyed.append(system_prompt);
  keyed.push_back('\x1e');
  keyed.append(user_prompt);
  return fnv1a64(keyed);
}

ChatClient::ChatClient(ChatClientConfig config) : config_(std::move(config)) {
  if (config_.backend == LlmBackend::http &&
      (config_.endpoint_url.empty() || config_.model_name.empty())) {
    throw Error(ErrorKind::InvalidConfig, "http chat backend requires endpoint_url and model_name");
  }
  if (config_.backend == LlmBackend::scripted) {
    if (config_.transcript_path.empty()) {
      throw Error(ErrorKind::InvalidConfig, "scripted chat backend requires transcript_path");
    }
    for_each_line(config_.transcript_path, [&](std::string_view line, std::size_t line_no) {
      json row = json::parse(line, nullptr, false);
      if (row.is_discarded() || !row.is_object() || !row.contains("request_hash") ||
          !row.contains("response")) {
        throw Error(ErrorKind::Corrupt,
                    "transcript line " + std::to_string(line_no) + ": bad record");
      }
      transcript_[row["request_hash"].get<std::uint64_t>()] = row["response"].get<std::string>();
    });
  }
  if (config_.max_concurrent < 1 || config_.max_concurrent > kMaxInFlight) {
    throw Error(ErrorKind::InvalidConfig, "max_concurrent out of range");
  }
  if (config_.temperature < 0.0) {
    throw Error(ErrorKind::InvalidConfig, "temperature must be >= 0");
  }
  if (config_.backend == LlmBackend::http) {
    http_gate_ = std::make_unique<std::counting_semaphore<kMaxInFlight>>(config_.max_concurrent);
  }
}

std::string ChatClient::chat(std::string_view system_prompt, std::string_view user_prompt) {
  if (system_prompt.empty() || user_prompt.empty()) {
    throw Error(ErrorKind::InvalidConfig, "chat prompts must be non-empty");
  }
  requests_.fetch_add(1);

  switch (config_.backend) {
    case LlmBackend::scripted: {
      const std::uint64_t hash = request_hash(system_prompt, user_prompt);
      auto it = transcript_.find(hash);
      if (it == transcript_.end()) {
        throw Error(ErrorKind::TranscriptMiss,
                    "no transcript entry for request_hash " + std::to_string(hash));
      }
      return it->second;
    }
    case LlmBackend::heuristic: {
      std::string reply = chat_heuristic(system_prompt, user_prompt);
      if (config_.record_transcript && !config_.transcript_path.empty()) {
        record(request_hash(system_prompt, user_prompt), reply);
      }
      return reply;
    }
    case LlmBackend::http: {
      std::string reply = chat_http(system_prompt, user_prompt);
      if (config_.record_transcript && !config_.transcript_path.empty()) {
        record(request_hash(system_prompt, user_prompt), reply);
      }
      return reply;
    }
  }
  throw Error(ErrorKind::InvalidConfig, "unreachable chat backend");
}

std::string ChatClient::chat_http(std::string_view system_prompt, std::string_view user_prompt) {
  http_gate_->acquire();
  struct Release {
    std::counting_semaphore<kMaxInFlight>* gate;
    ~Release() { gate->release(); }
  } release{http_gate_.get()};

  json request = {{"model", config_.model_name},
                  {"messages",
                   {{{"role", "system"}, {"content", std::string(system_prompt)}},
                    {{"role", "user"}, {"content", std::string(user_prompt)}}}},
                  {"temperature", config_.temperature},
                  {"max_tokens", config_.max_tokens}};

  const std::string body = post_json(config_.endpoint_url, "/v1/chat/completions",
                                     request.dump(), config_.max_retries,
                                     config_.retry_backoff_ms);
  json reply = json::parse(body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("choices") ||
      !reply["choices"].is_array() || reply["choices"].empty()) {
    throw Error(ErrorKind::Protocol, "chat response has no choices");
  }
  const json& first = reply["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw Error(ErrorKind::Protocol, "chat response choice has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

std::string ChatClient::chat_heuristic(std::string_view system_prompt,
                                       std::string_view user_prompt) const {
  if (system_prompt == prompts::kDecomposition) {
    // Split the query on "; " and the word "and"; fall back to the query
    // itself, mirroring the prompt's simple-question rule.
    const std::string query(user_prompt);
    std::vector<std::string> parts;
    std::string current;
    const std::string lowered = [&] {
      std::string s(query);
      std::transform(s.begin(), s.end(), s.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      return s;
    }();
    std::size_t pos = 0;
    while (pos < query.size()) {
      if (query.compare(pos, 2, "; ") == 0) {
        parts.push_back(current);
        current.clear();
        pos += 2;
      } else if (lowered.compare(pos, 5, " and ") == 0) {
        parts.push_back(current);
        current.clear();
        pos += 5;
      } else {
        current.push_back(query[pos]);
        ++pos;
      }
    }
    parts.push_back(current);
    json list = json::array();
    for (std::string& part : parts) {
      std::string t = trim_copy(part);
      if (!t.empty()) list.push_back(std::move(t));
    }
    if (list.size() < 2) {
      list = json::array();
      list.push_back(query);
    }
    return list.dump();
  }

  if (system_prompt == prompts::kCompression) {
    // Recover the question and documents from the fixed user framing, then
    // keep sentences sharing at least one non-stopword query term.
    constexpr std::string_view kQuestion = "Question: ";
    constexpr std::string_view kDocuments = "\n\nDocuments:\n";
    const std::string user(user_prompt);
    if (user.rfind(kQuestion, 0) == 0) {
      auto docs_at = user.find(kDocuments);
      if (docs_at != std::string::npos) {
        const std::string question = user.substr(kQuestion.size(), docs_at - kQuestion.size());
        const std::string docs_blob = user.substr(docs_at + kDocuments.size());

        const auto& stop = prompts::stopwords();
        std::vector<std::string> content_terms;
        for (const std::string& term : tokenize(question)) {
          if (std::find(stop.begin(), stop.end(), term) == stop.end()) {
            content_terms.push_back(term);
          }
        }

        std::vector<std::string> docs;
        std::size_t pos = 0;
        const std::string sep = "\n---\n";
        while (true) {
          auto next = docs_blob.find(sep, pos);
          docs.push_back(docs_blob.substr(pos, next == std::string::npos ? next : next - pos));
          if (next == std::string::npos) break;
          pos = next + sep.size();
        }

        std::string out;
        std::size_t selected = 0;
        for (const std::string& doc : docs) {
          for (const std::string& sentence : split_sentences(doc)) {
            if (selected >= 6) break;
            const std::vector<std::string> sentence_terms = tokenize(sentence);
            const bool hit = std::any_of(
                content_terms.begin(), content_terms.end(), [&](const std::string& t) {
                  return std::find(sentence_terms.begin(), sentence_terms.end(), t) !=
                         sentence_terms.end();
                });
            if (hit) {
              if (!out.empty()) out.push_back(' ');
              out += sentence;
              ++selected;
            }
          }
        }
        return out;
      }
    }
    return user;
  }

  // Unknown prompt (e.g. the generative baselines): echo the user message.
  return std::string(user_prompt);
}

void ChatClient::record(std::uint64_t hash, const std::string& response) {
  std::lock_guard<std::mutex> lock(record_mutex_);
  if (transcript_.count(hash) > 0) return;
  transcript_[hash] = response;
  std::ofstream out(config_.transcript_path, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot append transcript '" + config_.transcript_path + "'");
  }
  json row = {{"request_hash", hash}, {"response", response}};
  out << row.dump() << '\n';
}

std::vector<std::string> parse_subquery_list(std::string_view reply) {
  std::vector<std::string> items;
  const std::size_t open = reply.find('[');
  if (open == std::string_view::npos) return {};

  bool closed = false;
  int depth = 0;
  char quote = '\0';
  bool escaped = false;
  std::string current;
  bool in_string = false;

  for (std::size_t i = open; i < reply.size(); ++i) {
    const char c = reply[i];
    if (in_string) {
      if (escaped) {
        current.push_back(c);  // \' -> ', \" -> ", \\ -> \, \x -> x
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == quote) {
        in_string = false;
        items.push_back(current);
        current.clear();
      } else {
        current.push_back(c);
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      in_string = true;
      quote = c;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      if (--depth == 0) {
        closed = true;
        break;
      }
    }
  }
  if (!closed) return {};

  std::vector<std::string> out;
  for (std::string& item : items) {
    std::string t = trim_copy(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<SubQuery> decompose_query(ChatClient& client, std::string_view query) {
  if (query.empty()) throw Error(ErrorKind::InvalidConfig, "cannot decompose an empty query");
  const std::string reply = client.chat(prompts::kDecomposition, query);
  std::vector<std::string> parts = parse_subquery_list(reply);
  if (parts.empty()) parts.push_back(std::string(query));  // fallback: m = 1

  std::vector<SubQuery> out;
  out.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.push_back({std::move(parts[i]), static_cast<int>(i + 1)});
  }
  return out;
}

std::string compression_user_message(std::string_view sub_query,
                                     const std::vector<Passage>& docs) {
  std::string user = "Question: ";
  user += sub_query;
  user += "\n\nDocuments:\n";
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (i > 0) user += "\n---\n";
    user += docs[i].text;
  }
  return user;
}

CompressedDoc compress_documents(ChatClient& client, const SubQuery& sub_query,
                                 const std::vector<Passage>& docs, CompressionMode mode) {
  if (docs.empty()) {
    throw Error(ErrorKind::InvalidConfig, "compress_documents requires at least one document");
  }

  CompressedDoc out;
  out.sub_query_ordinal = sub_query.ordinal;
  for (const Passage& doc : docs) out.source_passage_ids.push_back(doc.passage_id);

  std::string text;
  if (mode == CompressionMode::concatenated) {
    text = client.chat(prompts::kCompression, compression_user_message(sub_query.text, docs));
  } else {
    for (const Passage& doc : docs) {
      std::string piece =
          client.chat(prompts::kCompression, compression_user_message(sub_query.text, {doc}));
      piece = trim_copy(piece);
      if (piece.empty()) continue;
      if (!text.empty()) text.push_back(' ');
      text += piece;
    }
  }

  text = trim_copy(text);
  if (text.empty()) {
    text = first_words(docs.front().text, kFallbackWordCap);
    std::cerr << "[decor] compression returned nothing for sub-query " << sub_query.ordinal
              << "; falling back to truncated source text\n";
  }
  out.text = std::move(text);
  return out;
}

}  // namespace decor
