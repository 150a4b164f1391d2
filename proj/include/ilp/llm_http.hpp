#pragma once

#include <httplib.h>
#include <json.hpp>

#include <string>

#include "ilp/llm.hpp"

namespace ilp {

/// Chat-completion HTTP provider. One request per call, bearer auth, 30s
/// timeout, non-2xx is a transport failure.
class HttpProvider : public CompletionProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (!config_.usable())
      throw ProviderError("ILP_LLM_ENDPOINT and ILP_LLM_MODEL must be set");
  }

  std::string id() const override { return "http:" + config_.model; }

  std::string complete(const std::string& prompt) override {
    // Split endpoint into scheme://host[:port] and path.
    std::string url = config_.endpoint;
    std::size_t scheme = url.find("://");
    std::size_t path_pos = scheme == std::string::npos
                               ? url.find('/')
                               : url.find('/', scheme + 3);
    std::string base = path_pos == std::string::npos ? url : url.substr(0, path_pos);
    std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);

    httplib::Client client(base);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_write_timeout(config_.timeout_seconds, 0);

    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);

    nlohmann::json request = {
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
    };
    auto res = client.Post(path, headers, request.dump(), "application/json");
    if (!res)
      throw ProviderError("transport failure: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw ProviderError("transport failure: HTTP " + std::to_string(res->status));

    nlohmann::json body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded() || !body.contains("choices") || body["choices"].empty() ||
        !body["choices"][0].contains("message"))
      throw ProviderError("malformed completion response");
    return body["choices"][0]["message"].value("content", "");
  }

 private:
  HttpProviderConfig config_;
};

}  // namespace ilp
