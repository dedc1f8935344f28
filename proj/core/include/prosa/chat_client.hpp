// Copyright 2026 The ProSA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// Chat-completion clients for prompted policies. Requests and responses are
// stored as JSON transcripts keyed by SHA-256 of (request, attempt), so a
// recorded campaign replays without network access.

#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "prosa/document.hpp"

namespace prosa {

class ChatError : public Error {
 public:
  using Error::Error;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the assistant message text. Throws ChatError on failure.
  virtual std::string complete(const nlohmann::json& request, int attempt) = 0;
};

std::string transcript_key(const nlohmann::json& request, int attempt);

class TranscriptStore {
 public:
  explicit TranscriptStore(std::filesystem::path dir);

  std::optional<std::string> load(const std::string& key) const;
  void save(const std::string& key, const nlohmann::json& request, int attempt,
            const std::string& response);
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

/// Serves responses from the store only.
class ReplayClient : public ChatClient {
 public:
  explicit ReplayClient(std::shared_ptr<TranscriptStore> store);
  std::string complete(const nlohmann::json& request, int attempt) override;

 private:
  std::shared_ptr<TranscriptStore> store_;
};

/// Serves stored responses and records new ones from the inner client.
class RecordingClient : public ChatClient {
 public:
  RecordingClient(std::shared_ptr<ChatClient> inner,
                  std::shared_ptr<TranscriptStore> store);
  std::string complete(const nlohmann::json& request, int attempt) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

struct HttpClientOptions {
  /// Scheme, host and optional port, e.g. https://api.example.com
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string api_key_env = "PROSA_API_KEY";
  int timeout_seconds = 120;
};

/// OpenAI-compatible chat completions over HTTP(S).
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientOptions options);
  std::string complete(const nlohmann::json& request, int attempt) override;

 private:
  HttpClientOptions options_;
};

/// Limits the number of concurrent requests to the inner client.
class BoundedClient : public ChatClient {
 public:
  BoundedClient(std::shared_ptr<ChatClient> inner, int max_in_flight);
  std::string complete(const nlohmann::json& request, int attempt) override;

 private:
  std::shared_ptr<ChatClient> inner_;
  std::counting_semaphore<64> slots_;
};

}  // namespace prosa
