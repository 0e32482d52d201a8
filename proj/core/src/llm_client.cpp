// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sarc/llm_client.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "sarc/errors.hpp"
#include "sarc/io.hpp"

namespace sarc {

void LlmConfig::validate() const {
  auto fail = [](std::string_view field, std::string_view why) {
    throw PreconditionError(fmt::format("llm.{}: {}", field, why));
  };
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    fail("base_url", "must start with http:// or https://");
  }
  if (model_name.empty()) fail("model_name", "must not be empty");
  if (!(temperature >= 0.0)) fail("temperature", "must be >= 0");
  if (max_output_tokens < 1) fail("max_output_tokens", "must be >= 1");
  if (max_retries < 0) fail("max_retries", "must be >= 0");
  if (request_timeout.count() < 1) fail("request_timeout", "must be >= 1 second");
  if (concurrency_limit < 1) fail("concurrency_limit", "must be >= 1");
  if (backoff_initial.count() < 0 || backoff_max < backoff_initial) fail("backoff", "need 0 <= initial <= max");
}

std::chrono::milliseconds backoff_delay(const LlmConfig& config, int attempt) {
  auto delay = config.backoff_initial;
  for (int i = 1; i < attempt && delay < config.backoff_max; ++i) delay *= 2;
  return std::min(delay, config.backoff_max);
}

ChatClient::ChatClient(LlmConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) throw PreconditionError("ChatClient: transport must not be null");
  slots_ = std::make_unique<std::counting_semaphore<>>(config_.concurrency_limit);
}

std::string ChatClient::request_body(const RenderedPrompt& prompt) const {
  nlohmann::ordered_json body;
  body["model"] = config_.model_name;
  body["messages"] = nlohmann::ordered_json::array({
      {{"role", "system"}, {"content", prompt.system}},
      {{"role", "user"}, {"content", prompt.user}},
  });
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_output_tokens;
  return body.dump();
}

std::string parse_completion_content(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("chat completion response is not JSON");
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw ProtocolError("chat completion response has no choices");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw ProtocolError("chat completion choice has no message");
  }
  const auto& message = choice["message"];
  if (!message.contains("content") || message["content"].is_null()) return {};
  if (!message["content"].is_string()) throw ProtocolError("chat completion content is not a string");
  return message["content"].get<std::string>();
}

std::string ChatClient::complete(const RenderedPrompt& prompt) {
  auto url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  HttpHeaders headers{{"Content-Type", "application/json"}};
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const auto body = request_body(prompt);

  int last_status = 0;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(config_, attempt));

    HttpResponse response;
    try {
      slots_->acquire();
      struct Release {
        std::counting_semaphore<>* sem;
        ~Release() { sem->release(); }
      } release{slots_.get()};
      response = transport_->post(url, headers, body, config_.request_timeout);
    } catch (const TransportError& e) {
      last_status = e.status();
      last_error = e.what();
      continue;
    }

    if (response.status >= 200 && response.status < 300) return parse_completion_content(response.body);
    last_status = response.status;
    last_error = fmt::format("HTTP {}", response.status);
    const bool retryable = response.status == 429 || response.status >= 500;
    if (!retryable) break;
  }
  throw TransportError(fmt::format("chat completion failed after {} attempt(s): {}", config_.max_retries + 1,
                                   last_error),
                       last_status);
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    std::ofstream touch(path_, std::ios::app);
    if (!touch) throw InputError(fmt::format("cache '{}' is not writable", path_.string()));
    return;
  }
  const auto contents = read_file(path_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::optional<std::size_t> torn_at;
  while (pos < contents.size()) {
    const std::size_t start = pos;
    auto end = contents.find('\n', pos);
    const bool last = end == std::string::npos;
    if (last) end = contents.size();
    std::string_view line(contents.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      if (last) {
        torn_at = start;
        break;
      }
      throw InputError(fmt::format("{}:{}: corrupt cache entry ({})", path_.string(), line_no, e.what()));
    }
  }
  // Drop a torn final record so the next append starts on a clean line.
  if (torn_at) {
    std::filesystem::resize_file(path_, *torn_at);
  } else if (!contents.empty() && contents.back() != '\n') {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << '\n';
  }
}

std::string ResponseCache::make_key(const std::string& model, const std::string& prompt_hash) {
  return model + "/" + prompt_hash;
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& model, const std::string& prompt_hash, const std::string& response) {
  nlohmann::ordered_json j;
  j["key"] = make_key(model, prompt_hash);
  j["model"] = model;
  j["prompt_hash"] = prompt_hash;
  j["response"] = response;
  j["timestamp"] = utc_timestamp();
  const auto line = j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";

  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << line;
  out.flush();
  if (!out) throw std::runtime_error(fmt::format("append to cache '{}' failed", path_.string()));
  entries_[j["key"].get<std::string>()] = response;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace sarc
