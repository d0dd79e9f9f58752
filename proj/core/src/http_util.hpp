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

#include <string>

namespace decor {

// POSTs a JSON body to endpoint_url + path and returns the response body.
// Retries transient failures (connect errors, 5xx, 429) up to max_attempts
// with exponential backoff starting at backoff_ms; throws Error(Transport)
// once attempts are exhausted or on a non-retryable status. Reads the bearer
// token from the DECOR_API_KEY environment variable when present.
std::string post_json(const std::string& endpoint_url, const std::string& path,
                      const std::string& body, int max_attempts, int backoff_ms);

}  // namespace decor
