// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sarc/prompt.hpp"

namespace sarc {

struct LlmConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name = "gpt-4o-2024-05-13";
  double temperature = 0.0;
  int max_output_tokens = 256;
  int max_retries = 3;
  std::chrono::seconds request_timeout{60};
  int concurrency_limit = 4;
  /// First retry waits this long; each further retry doubles it, capped at backoff_max.
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{30000};
  /// Bearer token. Populated from the environment; never serialized.
  std::string api_key;

  /// Throws PreconditionError naming the first invalid field.
  void validate() const;
};

/// Delay before retry number `attempt` (1-based).
std::chrono::milliseconds backoff_delay(const LlmConfig& config, int attempt);

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Blocking HTTP POST. Implementations throw TransportError(status 0) when no
/// response was received at all, and must be callable from several threads.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                            std::chrono::seconds timeout) = 0;
};

/// cpp-httplib backed transport; https URLs use OpenSSL.
std::shared_ptr<Transport> make_http_transport();

/// Client for an OpenAI-compatible `POST {base_url}/chat/completions` endpoint.
///
/// Transport failures, 429 and 5xx responses are retried with exponential
/// backoff up to `max_retries` times. At most `concurrency_limit` requests are
/// in flight through one client at any moment; the client can be shared
/// across threads.
class ChatClient {
 public:
  ChatClient(LlmConfig config, std::shared_ptr<Transport> transport);

  const LlmConfig& config() const { return config_; }

  /// Returns `choices[0].message.content`. Throws TransportError once retries
  /// are exhausted (carrying the last HTTP status) and ProtocolError for a
  /// response body that is not a chat completion.
  std::string complete(const RenderedPrompt& prompt);

  /// JSON request body sent for `prompt`.
  std::string request_body(const RenderedPrompt& prompt) const;

 private:
  LlmConfig config_;
  std::shared_ptr<Transport> transport_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

/// Extracts `choices[0].message.content` from a chat-completions body.
std::string parse_completion_content(const std::string& body);

/// Append-only JSONL cache of completions, one
/// `{key, model, prompt_hash, response, timestamp}` object per line.
class ResponseCache {
 public:
  /// Loads existing entries. A torn final line (from an interrupted write)
  /// is dropped from the file; corruption anywhere else is an InputError.
  explicit ResponseCache(std::filesystem::path path);

  static std::string make_key(const std::string& model, const std::string& prompt_hash);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& model, const std::string& prompt_hash, const std::string& response);
  std::size_t size() const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
};

}  // namespace sarc
