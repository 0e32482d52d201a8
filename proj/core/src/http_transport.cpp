// Copyright (c) 2026, The sarc Authors
// SPDX-License-Identifier: Apache-2.0

#include <fmt/format.h>

#include "httplib.h"
#include "sarc/errors.hpp"
#include "sarc/llm_client.hpp"

namespace sarc {
namespace {

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const std::string& url, const HttpHeaders& headers, const std::string& body,
                    std::chrono::seconds timeout) override {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw TransportError(fmt::format("malformed URL '{}'", url), 0);
    const auto path_start = url.find('/', scheme_end + 3);
    const auto origin = url.substr(0, path_start);
    const auto path = path_start == std::string::npos ? std::string("/") : url.substr(path_start);

    // One client per request keeps this object free of shared mutable state.
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers request_headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : headers) {
      if (name == "Content-Type") {
        content_type = value;
      } else {
        request_headers.emplace(name, value);
      }
    }
    auto result = client.Post(path, request_headers, body, content_type);
    if (!result) {
      throw TransportError(fmt::format("POST {} failed: {}", origin + path, httplib::to_string(result.error())), 0);
    }
    return HttpResponse{result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace sarc
