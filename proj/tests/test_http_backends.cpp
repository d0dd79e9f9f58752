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

#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "decor/embedding.hpp"
#include "decor/errors.hpp"
#include "decor/llm.hpp"

using namespace decor;
using nlohmann::json;

namespace {

// Serves OpenAI-compatible endpoints for the duration of one test.
class LocalServer {
 public:
  explicit LocalServer(httplib::Server& server) : server_(server) {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LocalServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server& server_;
  int port_ = 0;
  std::thread thread_;
};

EmbedderConfig http_embedder(const std::string& url) {
  EmbedderConfig config;
  config.backend = EmbedderBackend::http;
  config.endpoint_url = url;
  config.model_name = "test-model";
  config.max_retries = 3;
  config.retry_backoff_ms = 1;  // keep tests fast
  return config;
}

}  // namespace

TEST_CASE("http embedder round-trips the wire protocol") {
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const json body = json::parse(req.body);
    REQUIRE(body.at("model") == "test-model");
    json data = json::array();
    for (std::size_t i = 0; i < body.at("input").size(); ++i) {
      // Reversed order on purpose: the client must honor the index field.
      data.push_back({{"index", body["input"].size() - 1 - i},
                      {"embedding", {static_cast<double>(body["input"].size() - 1 - i), 1.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  LocalServer running(server);

  Embedder embedder(http_embedder(running.url()));
  const std::vector<Embedding> out = embedder.embed({"a", "b", "c"});
  REQUIRE(out.size() == 3);
  CHECK(out[0].values == std::vector<double>{0.0, 1.0});
  CHECK(out[1].values == std::vector<double>{1.0, 1.0});
  CHECK(out[2].values == std::vector<double>{2.0, 1.0});
  CHECK(requests.load() == 1);
}

TEST_CASE("http embedder batches by batch_size") {
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    ++requests;
    const json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body.at("input").size(); ++i) {
      data.push_back({{"index", i}, {"embedding", {1.0, 0.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  LocalServer running(server);

  EmbedderConfig config = http_embedder(running.url());
  config.batch_size = 2;
  config.max_concurrent = 2;
  Embedder embedder(config);
  CHECK(embedder.embed({"a", "b", "c", "d", "e"}).size() == 5);
  CHECK(requests.load() == 3);  // ceil(5 / 2)
}

TEST_CASE("wrong vector count raises Protocol") {
  httplib::Server server;
  server.Post("/v1/embeddings", [&](const httplib::Request&, httplib::Response& res) {
    json data = json::array();
    data.push_back({{"index", 0}, {"embedding", {1.0, 0.0}}});
    data.push_back({{"index", 1}, {"embedding", {0.0, 1.0}}});
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  LocalServer running(server);

  Embedder embedder(http_embedder(running.url()));
  try {
    embedder.embed({"a", "b", "c"});
    FAIL("expected Protocol");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Protocol);
  }
}

TEST_CASE("transient failures are retried, persistent ones surface as Transport") {
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++requests;
    if (n <= 2) {
      res.status = 503;
      return;
    }
    const json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body.at("input").size(); ++i) {
      data.push_back({{"index", i}, {"embedding", {1.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  LocalServer running(server);

  SUBCASE("third attempt succeeds") {
    Embedder embedder(http_embedder(running.url()));
    CHECK(embedder.embed({"x"}).size() == 1);
    CHECK(requests.load() == 3);
  }
  SUBCASE("attempt budget of 2 is exhausted first") {
    EmbedderConfig config = http_embedder(running.url());
    config.max_retries = 2;
    Embedder embedder(config);
    try {
      embedder.embed({"x"});
      FAIL("expected Transport");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Transport);
    }
    CHECK(requests.load() == 2);
  }
}

TEST_CASE("http chat extracts the first choice and sends the prompts verbatim") {
  httplib::Server server;
  std::string seen_system, seen_user;
  double seen_temperature = -1.0;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    seen_system = body.at("messages")[0].at("content");
    seen_user = body.at("messages")[1].at("content");
    seen_temperature = body.at("temperature").get<double>();
    json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "hi there"}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  LocalServer running(server);

  ChatClientConfig config;
  config.backend = LlmBackend::http;
  config.endpoint_url = running.url();
  config.model_name = "chat-model";
  config.retry_backoff_ms = 1;
  ChatClient client(config);

  CHECK(client.chat(prompts::kDecomposition, "What is the capital of Korea?") == "hi there");
  CHECK(seen_system == std::string(prompts::kDecomposition));  // prompt fidelity on the wire
  CHECK(seen_user == "What is the capital of Korea?");
  CHECK(seen_temperature == 0.0);
  CHECK(client.request_count() == 1);
}

TEST_CASE("http chat with malformed payload raises Protocol") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": []})", "application/json");
  });
  LocalServer running(server);

  ChatClientConfig config;
  config.backend = LlmBackend::http;
  config.endpoint_url = running.url();
  config.model_name = "chat-model";
  config.retry_backoff_ms = 1;
  ChatClient client(config);
  try {
    client.chat("sys", "user");
    FAIL("expected Protocol");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Protocol);
  }
}

TEST_CASE("endpoint URLs may carry a path prefix") {
  httplib::Server server;
  server.Post("/serve/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    json data = json::array();
    for (std::size_t i = 0; i < body.at("input").size(); ++i) {
      data.push_back({{"index", i}, {"embedding", {2.0}}});
    }
    res.set_content(json{{"data", data}}.dump(), "application/json");
  });
  LocalServer running(server);

  Embedder embedder(http_embedder(running.url() + "/serve"));
  CHECK(embedder.embed({"x"}).front().values == std::vector<double>{2.0});
}
