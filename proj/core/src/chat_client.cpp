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

#include "prosa/chat_client.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

#include "prosa/hash.hpp"

namespace prosa {

std::string transcript_key(const nlohmann::json& request, int attempt) {
  return sha256_hex(fmt::format("{}#{}", request.dump(), attempt));
}

TranscriptStore::TranscriptStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<std::string> TranscriptStore::load(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto path = dir_ / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    return doc.at("response").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ChatError(fmt::format("corrupt transcript {}: {}", path.string(), e.what()));
  }
}

void TranscriptStore::save(const std::string& key, const nlohmann::json& request,
                           int attempt, const std::string& response) {
  std::lock_guard lock(mutex_);
  const auto path = dir_ / (key + ".json");
  const auto tmp = dir_ / (key + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ChatError(fmt::format("cannot write {}", tmp.string()));
    const nlohmann::json doc = {{"request", request}, {"attempt", attempt},
                                {"response", response}};
    out << doc.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

ReplayClient::ReplayClient(std::shared_ptr<TranscriptStore> store)
    : store_(std::move(store)) {}

std::string ReplayClient::complete(const nlohmann::json& request, int attempt) {
  const std::string key = transcript_key(request, attempt);
  if (auto hit = store_->load(key)) return *hit;
  throw ChatError(fmt::format("no transcript for request {}", key));
}

RecordingClient::RecordingClient(std::shared_ptr<ChatClient> inner,
                                 std::shared_ptr<TranscriptStore> store)
    : inner_(std::move(inner)), store_(std::move(store)) {}

std::string RecordingClient::complete(const nlohmann::json& request, int attempt) {
  const std::string key = transcript_key(request, attempt);
  if (auto hit = store_->load(key)) return *hit;
  std::string response = inner_->complete(request, attempt);
  store_->save(key, request, attempt, response);
  return response;
}

HttpChatClient::HttpChatClient(HttpClientOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) throw ChatError("chat endpoint base URL is empty");
}

std::string HttpChatClient::complete(const nlohmann::json& request, int) {
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ChatError(fmt::format("environment variable {} is not set", options_.api_key_env));
  }
  httplib::Client client(options_.base_url);
  client.set_read_timeout(options_.timeout_seconds, 0);
  client.set_write_timeout(options_.timeout_seconds, 0);
  client.set_bearer_token_auth(key);
  const auto res = client.Post(options_.path, request.dump(), "application/json");
  if (!res) {
    throw ChatError(fmt::format("request failed: {}", httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw ChatError(fmt::format("endpoint returned HTTP {}", res->status));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ChatError(fmt::format("unexpected response body: {}", e.what()));
  }
}

BoundedClient::BoundedClient(std::shared_ptr<ChatClient> inner, int max_in_flight)
    : inner_(std::move(inner)), slots_(std::clamp(max_in_flight, 1, 64)) {}

std::string BoundedClient::complete(const nlohmann::json& request, int attempt) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->complete(request, attempt);
}

}  // namespace prosa
