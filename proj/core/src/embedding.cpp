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

#include "decor/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "decor/errors.hpp"
#include "decor/hash.hpp"
#include "decor/io_util.hpp"
#include "decor/tokenize.hpp"
#include "http_util.hpp"

namespace decor {

using nlohmann::json;

namespace {

constexpr int kIndexFormatVersion = 1;

double l2_norm(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

std::string cache_entry_key(const std::string& model, std::uint64_t text_hash) {
  return model + "\x1f" + std::to_string(text_hash);
}

std::string trimmed(std::string_view text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

}  // namespace

double cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimMismatch, "cosine over dims " + std::to_string(a.dim()) + " and " +
                                            std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
  const double na = l2_norm(a.values);
  const double nb = l2_norm(b.values);
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::ZeroVector, "cosine of an all-zero vector is undefined");
  }
  return dot / (na * nb);
}

Embedding mock_hashed_bow(std::string_view text, int dim) {
  if (dim < 2) throw Error(ErrorKind::InvalidConfig, "mock encoder needs dim >= 2");
  Embedding out;
  out.values.assign(static_cast<std::size_t>(dim), 0.0);
  for (const std::string& token : tokenize(text)) {
    const std::size_t slot = fnv1a64(token, kBowIndexSeed) % static_cast<std::size_t>(dim);
    const double sign = (fnv1a64(token, kBowSignSeed) & 1u) == 0 ? 1.0 : -1.0;
    const std::size_t extra = fnv1a64(token, kBowExtraSeed) % static_cast<std::size_t>(dim);
    out.values[slot] += 1.0;
    out.values[extra] += sign;
  }
  const double norm = l2_norm(out.values);
  if (norm == 0.0) {
    out.values[0] = 1.0;  // e_0 sentinel for token-free (or fully cancelled) text
    return out;
  }
  for (double& v : out.values) v /= norm;
  return out;
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
  if (!file_exists(path_)) return;
  for_each_line(path_, [&](std::string_view line, std::size_t line_no) {
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::Corrupt,
                  "embedding cache line " + std::to_string(line_no) + ": bad JSON");
    }
    entries_[cache_entry_key(row.at("model").get<std::string>(),
                             row.at("hash").get<std::uint64_t>())] =
        row.at("values").get<std::vector<double>>();
  });
}

const std::vector<double>* EmbeddingCache::lookup(const std::string& model,
                                                  std::uint64_t text_hash) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(cache_entry_key(model, text_hash));
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::insert(const std::string& model, std::uint64_t text_hash,
                            const std::vector<double>& values) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = entries_.emplace(cache_entry_key(model, text_hash), values);
  if (!inserted) return;
  json row = {{"model", model},
              {"hash", text_hash},
              {"dim", values.size()},
              {"values", values}};
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorKind::Io, "cannot append to embedding cache '" + path_ + "'");
  out << row.dump() << '\n';
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

Embedder::Embedder(EmbedderConfig config) : config_(std::move(config)) {
  if (config_.backend == EmbedderBackend::http) {
    if (config_.endpoint_url.empty() || config_.model_name.empty()) {
      throw Error(ErrorKind::InvalidConfig, "http embedder requires endpoint_url and model_name");
    }
  } else if (config_.dim < 2) {
    throw Error(ErrorKind::InvalidConfig, "mock embedder requires dim >= 2");
  }
  if (config_.batch_size < 1 || config_.max_concurrent < 1) {
    throw Error(ErrorKind::InvalidConfig, "batch_size and max_concurrent must be >= 1");
  }
  if (!config_.cache_path.empty()) {
    cache_ = std::make_shared<EmbeddingCache>(config_.cache_path);
  }
}

std::string Embedder::model_key() const {
  return config_.backend == EmbedderBackend::http
             ? config_.model_name
             : "mock_hashed_bow/" + std::to_string(config_.dim);
}

Embedding Embedder::embed_one(const std::string& text) { return embed({text}).front(); }

std::vector<Embedding> Embedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorKind::EmptyText, "embed called with no texts");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (trimmed(texts[i]).empty()) {
      throw Error(ErrorKind::EmptyText, "embed input " + std::to_string(i) + " is empty");
    }
  }

  const std::string model = model_key();
  std::vector<Embedding> out(texts.size());
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (cache_ != nullptr) {
      if (const auto* hit = cache_->lookup(model, fnv1a64(texts[i])); hit != nullptr) {
        out[i].values = *hit;
        continue;
      }
    }
    missing.push_back(i);
  }

  if (!missing.empty()) {
    std::vector<std::string> pending;
    pending.reserve(missing.size());
    for (std::size_t i : missing) pending.push_back(texts[i]);

    std::vector<Embedding> fresh;
    if (config_.backend == EmbedderBackend::mock_hashed_bow) {
      fresh.reserve(pending.size());
      for (const std::string& text : pending) fresh.push_back(mock_hashed_bow(text, config_.dim));
    } else {
      fresh = embed_http(pending);
    }
    for (std::size_t j = 0; j < missing.size(); ++j) {
      if (cache_ != nullptr) cache_->insert(model, fnv1a64(pending[j]), fresh[j].values);
      out[missing[j]] = std::move(fresh[j]);
    }
  }
  return out;
}

std::vector<Embedding> Embedder::embed_http(const std::vector<std::string>& texts) {
  const std::size_t batch = static_cast<std::size_t>(config_.batch_size);
  const std::size_t n_batches = (texts.size() + batch - 1) / batch;
  std::vector<Embedding> out(texts.size());

  auto run_batch = [&](std::size_t batch_index) {
    const std::size_t begin = batch_index * batch;
    const std::size_t end = std::min(begin + batch, texts.size());
    json request = {{"model", config_.model_name}, {"input", json::array()}};
    for (std::size_t i = begin; i < end; ++i) request["input"].push_back(texts[i]);

    const std::string body = post_json(config_.endpoint_url, "/v1/embeddings", request.dump(),
                                       config_.max_retries, config_.retry_backoff_ms);
    json reply = json::parse(body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("data") ||
        !reply["data"].is_array()) {
      throw Error(ErrorKind::Protocol, "embeddings response has no data array");
    }
    if (reply["data"].size() != end - begin) {
      throw Error(ErrorKind::Protocol,
                  "embeddings response carries " + std::to_string(reply["data"].size()) +
                      " vectors for " + std::to_string(end - begin) + " inputs");
    }
    for (const json& item : reply["data"]) {
      if (!item.contains("index") || !item.contains("embedding")) {
        throw Error(ErrorKind::Protocol, "embeddings response entry missing index/embedding");
      }
      const std::size_t index = item["index"].get<std::size_t>();
      if (index >= end - begin) {
        throw Error(ErrorKind::Protocol, "embeddings response index out of range");
      }
      out[begin + index].values = item["embedding"].get<std::vector<double>>();
    }
  };

  if (n_batches == 1 || config_.max_concurrent == 1) {
    for (std::size_t i = 0; i < n_batches; ++i) run_batch(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_batches) return;
      try {
        run_batch(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> workers;
  const std::size_t n_workers =
      std::min(static_cast<std::size_t>(config_.max_concurrent), n_batches);
  workers.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
  for (std::thread& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

VectorIndex VectorIndex::build(const std::vector<Passage>& passages, Embedder& embedder) {
  if (passages.empty()) {
    throw Error(ErrorKind::EmptyCorpus, "cannot build a vector index over zero passages");
  }
  std::vector<std::string> texts;
  texts.reserve(passages.size());
  for (const Passage& p : passages) texts.push_back(embedder.config().passage_prefix + p.text);

  const std::vector<Embedding> embeddings = embedder.embed(texts);

  VectorIndex index;
  index.model_ = embedder.model_key();
  index.dim_ = embeddings.front().dim();
  index.matrix_.reserve(passages.size() * index.dim_);
  index.ids_.reserve(passages.size());
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (embeddings[i].dim() != index.dim_) {
      throw Error(ErrorKind::DimMismatch, "encoder returned mixed dimensions");
    }
    double norm = 0.0;
    for (double v : embeddings[i].values) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      throw Error(ErrorKind::ZeroVector,
                  "passage '" + passages[i].passage_id + "' embedded to the zero vector");
    }
    for (double v : embeddings[i].values) index.matrix_.push_back(v / norm);
    index.ids_.push_back(passages[i].passage_id);
  }
  return index;
}

std::vector<ScoredHit> VectorIndex::search(const Embedding& query, int k) const {
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "dense search requires k >= 1");
  if (query.dim() != dim_) {
    throw Error(ErrorKind::DimMismatch, "query dim " + std::to_string(query.dim()) +
                                            " != index dim " + std::to_string(dim_));
  }
  double norm = l2_norm(query.values);
  if (norm == 0.0) throw Error(ErrorKind::ZeroVector, "query embedded to the zero vector");

  std::vector<double> scores(ids_.size(), 0.0);
  for (std::size_t row = 0; row < ids_.size(); ++row) {
    const double* base = matrix_.data() + row * dim_;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dot += base[i] * query.values[i];
    scores[row] = dot / norm;
  }

  std::vector<std::size_t> order(ids_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids_[a] < ids_[b];
  });
  if (order.size() > static_cast<std::size_t>(k)) order.resize(static_cast<std::size_t>(k));

  std::vector<ScoredHit> hits;
  hits.reserve(order.size());
  for (std::size_t row : order) {
    hits.push_back({ids_[row], scores[row], static_cast<int>(hits.size() + 1)});
  }
  return hits;
}

Embedding VectorIndex::row(std::size_t index) const {
  Embedding out;
  out.values.assign(matrix_.begin() + static_cast<std::ptrdiff_t>(index * dim_),
                    matrix_.begin() + static_cast<std::ptrdiff_t>((index + 1) * dim_));
  return out;
}

void VectorIndex::save(const std::string& path) const {
  std::string body;
  for (std::size_t row = 0; row < ids_.size(); ++row) {
    json values = json::array();
    const double* base = matrix_.data() + row * dim_;
    for (std::size_t i = 0; i < dim_; ++i) values.push_back(base[i]);
    json line = {{"id", ids_[row]}, {"v", std::move(values)}};
    body += line.dump();
    body.push_back('\n');
  }
  json header = {{"format_version", kIndexFormatVersion},
                 {"dim", dim_},
                 {"num_rows", ids_.size()},
                 {"model", model_},
                 {"checksum", fnv1a64(body)}};
  write_file(path, header.dump() + "\n" + body);
}

VectorIndex VectorIndex::load(const std::string& path) {
  const std::string blob = read_file(path);
  const auto newline = blob.find('\n');
  if (newline == std::string::npos) {
    throw Error(ErrorKind::Corrupt, "vector index '" + path + "': missing header line");
  }
  json header = json::parse(blob.substr(0, newline), nullptr, false);
  if (header.is_discarded() || !header.is_object() || !header.contains("format_version")) {
    throw Error(ErrorKind::Corrupt, "vector index '" + path + "': unreadable header");
  }
  if (header["format_version"].get<int>() != kIndexFormatVersion) {
    throw Error(ErrorKind::VersionMismatch, "vector index format_version " +
                                                header["format_version"].dump() + ", expected " +
                                                std::to_string(kIndexFormatVersion));
  }
  const std::string body = blob.substr(newline + 1);
  if (fnv1a64(body) != header.at("checksum").get<std::uint64_t>()) {
    throw Error(ErrorKind::Corrupt, "vector index '" + path + "': checksum mismatch");
  }

  VectorIndex index;
  index.dim_ = header.at("dim").get<std::size_t>();
  index.model_ = header.value("model", "");
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    json row = json::parse(body.substr(pos, end - pos), nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      throw Error(ErrorKind::Corrupt, "vector index '" + path + "': bad row");
    }
    std::vector<double> values = row.at("v").get<std::vector<double>>();
    if (values.size() != index.dim_) {
      throw Error(ErrorKind::Corrupt, "vector index '" + path + "': row dim mismatch");
    }
    index.ids_.push_back(row.at("id").get<std::string>());
    index.matrix_.insert(index.matrix_.end(), values.begin(), values.end());
    pos = end + 1;
  }
  if (index.ids_.size() != header.at("num_rows").get<std::size_t>()) {
    throw Error(ErrorKind::Corrupt, "vector index '" + path + "': row count disagrees with header");
  }
  return index;
}

}  // namespace decor
