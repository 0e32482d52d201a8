// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "sarc/batch.hpp"
#include "sarc/errors.hpp"
#include "sarc/hash.hpp"
#include "sarc/io.hpp"
#include "sarc/llm_client.hpp"
#include "support/fake_endpoint.hpp"
#include "support/fixtures.hpp"

using namespace sarc;
using sarc::testing::ChatRequest;
using sarc::testing::completion_body;
using sarc::testing::FakeTransport;
using sarc::testing::TempDir;
using namespace std::chrono_literals;

namespace {

LlmConfig fast_config() {
  LlmConfig c;
  c.base_url = "http://fake/v1";
  c.model_name = "model-5";
  c.max_retries = 3;
  c.backoff_initial = 0ms;
  c.backoff_max = 0ms;
  return c;
}

RenderedPrompt prompt(std::string q = "q") { return RenderedPrompt{"sys", "- a 1\n- b 0\n\n- " + q}; }

HttpResponse ok(const std::string& content) { return {200, completion_body(content)}; }

PromptTemplate classify_template() {
  return PromptTemplate{PromptTask::kClassify, "Classify.", {{"yes", "1"}, {"no", "0"}}, " "};
}

PromptTemplate translate_template() {
  return PromptTemplate{PromptTask::kTranslate, "Please translate.", {{"a", "A"}}, " // "};
}

}  // namespace

TEST_SUITE("llm_client") {
  TEST_CASE("request body and endpoint") {
    auto config = fast_config();
    config.api_key = "sk-test-secret";
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("1"); });
    ChatClient client(config, t);
    CHECK(client.complete(prompt()) == "1");
    REQUIRE(t->calls() == 1);
    CHECK(t->urls()[0] == "http://fake/v1/chat/completions");
    const auto body = nlohmann::json::parse(t->bodies()[0]);
    CHECK(body["model"] == "model-5");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["max_tokens"] == 256);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "sys");
    CHECK(body["messages"][1]["role"] == "user");
    bool has_auth = false;
    const auto headers = t->headers();
    for (const auto& [k, v] : headers[0]) has_auth |= k == "Authorization" && v == "Bearer sk-test-secret";
    CHECK(has_auth);
  }

  TEST_CASE("no Authorization header without a key") {
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("0"); });
    ChatClient client(fast_config(), t);
    client.complete(prompt());
    const auto headers = t->headers();
    for (const auto& [k, v] : headers[0]) CHECK(k != "Authorization");
  }

  TEST_CASE("backoff doubles and is capped") {
    LlmConfig c;
    CHECK(backoff_delay(c, 1) == 500ms);
    CHECK(backoff_delay(c, 2) == 1000ms);
    CHECK(backoff_delay(c, 3) == 2000ms);
    CHECK(backoff_delay(c, 7) == 30000ms);
    CHECK(backoff_delay(c, 60) == 30000ms);
  }

  TEST_CASE("429 and 5xx are retried until success") {
    for (int status : {429, 500, 502, 503}) {
      auto t = std::make_shared<FakeTransport>([status](const ChatRequest&, int i) {
        return i < 2 ? HttpResponse{status, "busy"} : ok("1");
      });
      ChatClient client(fast_config(), t);
      CHECK(client.complete(prompt()) == "1");
      CHECK(t->calls() == 3);
    }
  }

  TEST_CASE("transport failures are retried") {
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int i) -> HttpResponse {
      if (i == 0) throw TransportError("connection reset", 0);
      return ok("0");
    });
    ChatClient client(fast_config(), t);
    CHECK(client.complete(prompt()) == "0");
    CHECK(t->calls() == 2);
  }

  TEST_CASE("retries are bounded and the last status is reported") {
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return HttpResponse{503, "down"}; });
    ChatClient client(fast_config(), t);
    try {
      client.complete(prompt());
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.status() == 503);
    }
    CHECK(t->calls() == 4);
  }

  TEST_CASE("other 4xx responses fail without retry") {
    for (int status : {400, 401, 403, 404}) {
      auto t = std::make_shared<FakeTransport>([status](const ChatRequest&, int) { return HttpResponse{status, "no"}; });
      ChatClient client(fast_config(), t);
      CHECK_THROWS_AS(client.complete(prompt()), TransportError);
      CHECK(t->calls() == 1);
    }
  }

  TEST_CASE("malformed completion bodies are protocol errors") {
    CHECK_THROWS_AS(parse_completion_content("<html>"), ProtocolError);
    CHECK_THROWS_AS(parse_completion_content("{}"), ProtocolError);
    CHECK_THROWS_AS(parse_completion_content("{\"choices\":[]}"), ProtocolError);
    CHECK_THROWS_AS(parse_completion_content("{\"choices\":[{\"message\":{\"content\":5}}]}"), ProtocolError);
    CHECK(parse_completion_content("{\"choices\":[{\"message\":{\"content\":null}}]}").empty());
    CHECK(parse_completion_content(completion_body("1 \U0001F643")) == "1 \U0001F643");

    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return HttpResponse{200, "not json"}; });
    ChatClient client(fast_config(), t);
    CHECK_THROWS_AS(client.complete(prompt()), ProtocolError);
  }

  TEST_CASE("invalid client config is rejected") {
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("1"); });
    auto c = fast_config();
    c.concurrency_limit = 0;
    CHECK_THROWS_AS(ChatClient(c, t), PreconditionError);
    c = fast_config();
    c.max_retries = -1;
    CHECK_THROWS_AS(ChatClient(c, t), PreconditionError);
    CHECK_THROWS_AS(ChatClient(fast_config(), nullptr), PreconditionError);
  }

  TEST_CASE("concurrency limit bounds in-flight requests") {
    TempDir dir;
    for (int limit : {1, 3}) {
      auto c = fast_config();
      c.concurrency_limit = limit;
      auto t = std::make_shared<FakeTransport>(
          [](const ChatRequest& r, int) { return ok(sarc::testing::scripted_reply(r)); }, 15ms);
      ChatClient client(c, t);
      ResponseCache cache(dir / ("c" + std::to_string(limit) + ".jsonl"));
      std::vector<int> labels(24);
      for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 2;
      const auto corpus = sarc::testing::make_corpus(labels);
      classify_corpus(corpus, classify_template(), client, "m", cache, ClassifyField::kSource);
      CHECK(t->calls() == 24);
      CHECK(t->peak_in_flight() <= limit);
      CHECK(t->peak_in_flight() == limit);
    }
  }

  TEST_CASE("a second classify run over a warm cache makes no requests") {
    TempDir dir;
    std::vector<int> labels{1, 0, 1, 0, 1, 0, 0, 1};
    const auto corpus = sarc::testing::make_corpus(labels);
    auto t = std::make_shared<FakeTransport>([](const ChatRequest& r, int) { return ok(sarc::testing::scripted_reply(r)); });
    ChatClient client(fast_config(), t);
    ClassifyResult first;
    {
      ResponseCache cache(dir / "cache.jsonl");
      first = classify_corpus(corpus, classify_template(), client, "m", cache, ClassifyField::kSource);
      CHECK(first.summary.requests == labels.size());
      CHECK(first.summary.cache_hits == 0);
    }
    const int calls = t->calls();
    ResponseCache reopened(dir / "cache.jsonl");
    CHECK(reopened.size() == labels.size());
    const auto second = classify_corpus(corpus, classify_template(), client, "m", reopened, ClassifyField::kSource);
    CHECK(t->calls() == calls);
    CHECK(second.summary.requests == 0);
    CHECK(second.summary.cache_hits == labels.size());
    CHECK(to_jsonl(second.predictions) == to_jsonl(first.predictions));
  }

  TEST_CASE("cache entries: key format, fields, and no API key") {
    TempDir dir;
    auto c = fast_config();
    c.api_key = "sk-should-never-be-written";
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("1"); });
    ChatClient client(c, t);
    ResponseCache cache(dir / "cache.jsonl");
    const auto corpus = sarc::testing::make_corpus({1, 0});
    classify_corpus(corpus, classify_template(), client, "m", cache, ClassifyField::kSource);
    const auto text = read_file(dir / "cache.jsonl");
    CHECK(text.find("sk-should-never-be-written") == std::string::npos);
    const auto first_line = text.substr(0, text.find('\n'));
    const auto j = nlohmann::ordered_json::parse(first_line);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"key", "model", "prompt_hash", "response", "timestamp"});
    const auto expected_hash =
        sha256_hex(render_classification_prompt(corpus.examples()[0].text_source, classify_template()).text());
    const auto second_hash =
        sha256_hex(render_classification_prompt(corpus.examples()[1].text_source, classify_template()).text());
    const auto hash = j["prompt_hash"].get<std::string>();
    CHECK((hash == expected_hash || hash == second_hash));
    CHECK(j["key"] == "model-5/" + hash);
    CHECK(j["model"] == "model-5");
  }

  TEST_CASE("cache keys separate models") {
    TempDir dir;
    ResponseCache cache(dir / "c.jsonl");
    cache.store("a", "h", "1");
    CHECK(cache.lookup(ResponseCache::make_key("a", "h")) == "1");
    CHECK_FALSE(cache.lookup(ResponseCache::make_key("b", "h")).has_value());
  }

  TEST_CASE("a torn final cache line is ignored and later appends still load") {
    TempDir dir;
    {
      ResponseCache cache(dir / "c.jsonl");
      cache.store("m", "h1", "0");
      cache.store("m", "h2", "1");
    }
    {
      std::ofstream out(dir / "c.jsonl", std::ios::app | std::ios::binary);
      out << "{\"key\":\"m/h3\",\"mod";
    }
    {
      ResponseCache cache(dir / "c.jsonl");
      CHECK(cache.size() == 2);
      cache.store("m", "h4", "1");
    }
    ResponseCache cache(dir / "c.jsonl");
    CHECK(cache.size() == 3);
    CHECK(cache.lookup("m/h4") == "1");
  }

  TEST_CASE("corruption before the final line is an error") {
    TempDir dir;
    sarc::testing::write_text(dir / "c.jsonl", "garbage\n{\"key\":\"k\",\"response\":\"1\"}\n");
    CHECK_THROWS_AS(ResponseCache(dir / "c.jsonl"), InputError);
  }

  TEST_CASE("translate_corpus fills targets and records failures") {
    TempDir dir;
    const auto corpus = sarc::testing::make_corpus({1, 0, 1, 0});
    const auto bad_id = corpus.examples()[2].text_source;
    auto t = std::make_shared<FakeTransport>([bad_id](const ChatRequest& r, int) {
      if (sarc::testing::query_of(r.user) == bad_id) return HttpResponse{400, "bad"};
      return ok("  " + sarc::testing::scripted_reply(r) + "\n");
    });
    ChatClient client(fast_config(), t);
    ResponseCache cache(dir / "c.jsonl");
    const auto result = translate_corpus(corpus, translate_template(), client, cache);
    REQUIRE(result.summary.failures.size() == 1);
    CHECK(result.summary.failures[0].example_id == corpus.examples()[2].id);
    CHECK_FALSE(result.corpus.examples()[2].text_target.has_value());
    CHECK(result.corpus.examples()[0].text_target == "SL: " + corpus.examples()[0].text_source);
  }

  TEST_CASE("an unusable template fails before any request") {
    TempDir dir;
    const auto corpus = sarc::testing::make_corpus({1, 0});
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("x"); });
    ChatClient client(fast_config(), t);
    ResponseCache cache(dir / "c.jsonl");
    PromptTemplate no_shots{PromptTask::kTranslate, "T", {}, " // "};
    CHECK_THROWS_AS(translate_corpus(corpus, no_shots, client, cache), PreconditionError);
    PromptTemplate one_class{PromptTask::kClassify, "C", {{"a", "1"}}, " "};
    CHECK_THROWS_AS(classify_corpus(corpus, one_class, client, "m", cache, ClassifyField::kSource), PreconditionError);
    CHECK(t->calls() == 0);
  }

  TEST_CASE("classify_corpus maps replies to predictions") {
    TempDir dir;
    const auto corpus = sarc::testing::make_corpus({1, 0, 1});
    const std::vector<std::string> replies{"1", "sorry, no", " 0\n"};
    auto t = std::make_shared<FakeTransport>([&](const ChatRequest& r, int) {
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (sarc::testing::query_of(r.user) == corpus.examples()[i].text_source) return ok(replies[i]);
      }
      return HttpResponse{500, ""};
    });
    ChatClient client(fast_config(), t);
    ResponseCache cache(dir / "c.jsonl");
    const auto result = classify_corpus(corpus, classify_template(), client, "model-x", cache, ClassifyField::kSource);
    REQUIRE(result.predictions.size() == 3);
    CHECK(result.predictions[0].p_sarcastic == 1.0);
    CHECK(result.predictions[1].status == PredictionStatus::kRefused);
    CHECK_FALSE(result.predictions[1].p_sarcastic.has_value());
    CHECK(result.predictions[2].p_sarcastic == 0.0);
    CHECK(result.predictions[2].model_id == "model-x");
  }

  TEST_CASE("classifying missing translations is a per-example failure") {
    TempDir dir;
    const auto corpus = sarc::testing::make_corpus({1, 0});
    auto t = std::make_shared<FakeTransport>([](const ChatRequest&, int) { return ok("1"); });
    ChatClient client(fast_config(), t);
    ResponseCache cache(dir / "c.jsonl");
    const auto result = classify_corpus(corpus, classify_template(), client, "m", cache, ClassifyField::kTarget);
    CHECK(result.predictions.empty());
    CHECK(result.summary.failures.size() == 2);
    CHECK(t->calls() == 0);
  }

  TEST_CASE("HTTP transport against a local server") {
    sarc::testing::FakeServer server;
    auto c = fast_config();
    c.base_url = server.base_url();
    ChatClient client(c, make_http_transport());
    const auto reply = client.complete(RenderedPrompt{"Please translate.", "- a // A\n\n- hello //"});
    CHECK(reply == "SL: hello");
    CHECK(server.requests() == 1);
  }

  TEST_CASE("HTTP transport reports refused connections as transport errors") {
    int port = 0;
    {
      sarc::testing::FakeServer server;
      const auto url = server.base_url();
      port = std::stoi(url.substr(url.rfind(':') + 1));
    }
    auto c = fast_config();
    c.max_retries = 1;
    c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    ChatClient client(c, make_http_transport());
    try {
      client.complete(prompt());
      FAIL("expected TransportError");
    } catch (const TransportError& e) {
      CHECK(e.status() == 0);
    }
  }
}
