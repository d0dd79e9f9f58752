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

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "decor/corpus.hpp"
#include "decor/hit.hpp"

namespace decor {

struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
};

enum class EmbedderBackend { http, mock_hashed_bow };

struct EmbedderConfig {
  EmbedderBackend backend = EmbedderBackend::mock_hashed_bow;
  std::string endpoint_url;  // http: base URL, /v1/embeddings is appended
  std::string model_name;    // http: model field of the request
  int dim = 256;             // mock only
  int batch_size = 16;
  int max_concurrent = 4;
  int max_retries = 3;
  int retry_backoff_ms = 500;
  std::string query_prefix;    // prepended to query-side texts
  std::string passage_prefix;  // prepended to passage texts at indexing
  std::string cache_path;      // empty disables the on-disk cache
};

// Cosine similarity (a.b)/(|a||b|). Throws DimMismatch / ZeroVector.
double cosine(const Embedding& a, const Embedding& b);

// Deterministic test encoder: signed feature-hashed bag of words. Each token
// adds +1 at h1(t) mod dim and +-1 (sign from h2(t)) at h3(t) mod dim; the
// result is L2-normalized. Token-free text maps to the unit vector e_0.
Embedding mock_hashed_bow(std::string_view text, int dim);

/// Disk-backed (model, text-hash) -> vector map. Concurrent reads, writes
/// serialized by an internal mutex; the file is append-only JSON lines.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::string path);

  const std::vector<double>* lookup(const std::string& model, std::uint64_t text_hash) const;
  void insert(const std::string& model, std::uint64_t text_hash,
              const std::vector<double>& values);
  std::size_t size() const;

 private:
  std::string path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::vector<double>> entries_;
};

/// Encoder front end. Order-preserving, cache-aware, and safe to call from
/// multiple threads (at most max_concurrent in-flight HTTP requests).
class Embedder {
 public:
  explicit Embedder(EmbedderConfig config);

  std::vector<Embedding> embed(const std::vector<std::string>& texts);
  Embedding embed_one(const std::string& text);

  // Cache key namespace: the model name for http, "mock_hashed_bow/<dim>"
  // for the mock backend.
  std::string model_key() const;
  const EmbedderConfig& config() const { return config_; }

 private:
  std::vector<Embedding> embed_http(const std::vector<std::string>& texts);

  EmbedderConfig config_;
  std::shared_ptr<EmbeddingCache> cache_;
};

/// Row-normalized embedding matrix over passages; exact top-k cosine search.
class VectorIndex {
 public:
  static VectorIndex build(const std::vector<Passage>& passages, Embedder& embedder);

  // Exact top-k by cosine; ties broken by ascending passage_id. The query
  // embedding is normalized internally, so any positive rescaling of it
  // returns the identical ranking.
  std::vector<ScoredHit> search(const Embedding& query, int k) const;

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& model() const { return model_; }
  const std::string& passage_id(std::size_t row) const { return ids_[row]; }
  Embedding row(std::size_t index) const;

  void save(const std::string& path) const;
  static VectorIndex load(const std::string& path);

 private:
  VectorIndex() = default;

  std::vector<double> matrix_;  // row-major, rows unit-normalized
  std::vector<std::string> ids_;
  std::size_t dim_ = 0;
  std::string model_;
};

}  // namespace decor
