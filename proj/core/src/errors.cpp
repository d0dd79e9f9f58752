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

#include "decor/errors.hpp"

namespace decor {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::MalformedInput: return "malformed_input";
    case ErrorKind::InvalidConfig: return "invalid_config";
    case ErrorKind::EmptyCorpus: return "empty_corpus";
    case ErrorKind::VersionMismatch: return "version_mismatch";
    case ErrorKind::Corrupt: return "corrupt";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::EmptyText: return "empty_text";
    case ErrorKind::DimMismatch: return "dim_mismatch";
    case ErrorKind::ZeroVector: return "zero_vector";
    case ErrorKind::TranscriptMiss: return "transcript_miss";
    case ErrorKind::UnknownQuery: return "unknown_query";
    case ErrorKind::MalformedRunFile: return "malformed_run_file";
    case ErrorKind::ConfigError: return "config_error";
    case ErrorKind::MissingArtifact: return "missing_artifact";
  }
  return "unknown";
}

}  // namespace decor
