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

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decor/corpus.hpp"

namespace decor {

namespace prompts {

// System prompts sent verbatim on every decomposition / compression request.
// The copies under core/prompts/ are the reference fixtures; a unit test
// keeps these constants byte-identical to them.
extern const std::string_view kDecomposition;
extern const std::string_view kCompression;

// 25 most common English function words; used only by the heuristic backend.
extern const std::vector<std::string>& stopwords();

}  // namespace prompts

enum class LlmBackend { http, scripted, heuristic };

struct ChatClientConfig {
  LlmBackend backend = LlmBackend::heuristic;
  std::string endpoint_url;  // http
  std::string model_name;    // http
  std::string transcript_path;
  bool record_transcript = false;  // append live responses for later replay
  double temperature = 0.0;
  int max_tokens = 512;
  int max_concurrent = 4;
  int max_retries = 3;
  int retry_backoff_ms = 500;
};

struct SubQuery {
  std::string text;
  int ordinal = 1;  // 1-based, contiguous
};

struct CompressedDoc {
  std::string text;
  int sub_query_ordinal = 0;
  std::vector<std::string> source_passage_ids;
};

enum class CompressionMode { concatenated, document_wise };

/// Chat-completion client over one of three backends: an OpenAI-compatible
/// HTTP endpoint, a scripted transcript replay (deterministic), or the
/// built-in heuristic synthesizer. Thread-safe; request_count() observes
/// how many chat calls were issued.
class ChatClient {
 public:
  explicit ChatClient(ChatClientConfig config);

  std::string chat(std::string_view system_prompt, std::string_view user_prompt);

  std::uint64_t request_count() const { return requests_.load(); }

  // Transcript key: FNV-1a over system + '\x1e' + user.
  static std::uint64_t request_hash(std::string_view system_prompt,
                                    std::string_view user_prompt);

  const ChatClientConfig& config() const { return config_; }

 private:
  static constexpr int kMaxInFlight = 4096;

  std::string chat_http(std::string_view system_prompt, std::string_view user_prompt);
  std::string chat_heuristic(std::string_view system_prompt, std::string_view user_prompt) const;
  void record(std::uint64_t hash, const std::string& response);

  ChatClientConfig config_;
  std::unordered_map<std::uint64_t, std::string> transcript_;
  std::mutex record_mutex_;
  std::atomic<std::uint64_t> requests_{0};
  std::unique_ptr<std::counting_semaphore<kMaxInFlight>> http_gate_;
};

// Extracts the quoted strings of the first bracketed list in the reply,
// tolerating prose around it, mixed quote styles, and backslash escapes.
// Total: any unparsable input yields an empty vector.
std::vector<std::string> parse_subquery_list(std::string_view reply);

// Decomposes q into sub-queries via the decomposition prompt. Falls back to
// the original query as the single sub-query when the reply does not parse,
// so callers always receive m >= 1.
std::vector<SubQuery> decompose_query(ChatClient& client, std::string_view query);

// Compresses candidate passages for one sub-query. concatenated mode issues
// one chat call over all documents joined by "\n---\n"; document_wise issues
// one call per document and joins the outputs with single spaces. An empty
// reply falls back to the first 50 words of the first document.
CompressedDoc compress_documents(ChatClient& client, const SubQuery& sub_query,
                                 const std::vector<Passage>& docs, CompressionMode mode);

// User-message framing shared by compression and its transcript tooling.
std::string compression_user_message(std::string_view sub_query,
                                     const std::vector<Passage>& docs);

}  // namespace decor
