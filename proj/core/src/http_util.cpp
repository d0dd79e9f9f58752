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

#include "http_util.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "decor/errors.hpp"

namespace decor {

namespace {

// Splits "scheme://host:port/prefix" into the client base and the path
// prefix httplib expects.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

std::string post_json(const std::string& endpoint_url, const std::string& path,
                      const std::string& body, int max_attempts, int backoff_ms) {
  const auto [base, prefix] = split_url(endpoint_url);
  httplib::Client client(base);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(120, 0);

  httplib::Headers headers;
  if (const char* key = std::getenv("DECOR_API_KEY"); key != nullptr && key[0] != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_failure = "no attempt made";
  int delay_ms = backoff_ms;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
      delay_ms *= 2;
    }
    auto result = client.Post(prefix + path, headers, body, "application/json");
    if (!result) {
      last_failure = "connection error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 200) return result->body;
    last_failure = "HTTP " + std::to_string(result->status);
    if (!retryable_status(result->status)) break;
  }
  throw Error(ErrorKind::Transport,
              "POST " + endpoint_url + path + " failed (" + last_failure + ")");
}

}  // namespace decor
