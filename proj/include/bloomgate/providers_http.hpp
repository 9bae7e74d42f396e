#pragma once

// HTTP clients for the chat and embedding provider contracts:
//
//   POST {base_url}/chat   {"system": "...", "user": "...", "model": "...", "temperature": 0}
//                          -> {"text": "..."}
//   POST {base_url}/embed  {"texts": ["...", ...]} -> {"vectors": [[...], ...]}
//
// Both send `Authorization: Bearer <token>` when a token is configured.

#include <httplib.h>

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bloomgate/error.hpp"
#include "bloomgate/judge.hpp"
#include "bloomgate/semantic.hpp"

namespace bloomgate::providers {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
};

inline Endpoint split_base_url(const std::string& base_url) {
  auto scheme = base_url.find("://");
  if (scheme == std::string::npos || base_url.empty()) {
    throw Error(ErrorCode::InvalidConfig, "provider base_url must look like http://host[:port][/prefix]: '" + base_url + "'");
  }
  auto path = base_url.find('/', scheme + 3);
  Endpoint e;
  e.origin = base_url.substr(0, path);
  e.prefix = path == std::string::npos ? "" : base_url.substr(path);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

namespace detail {

inline nlohmann::json post_json(const Endpoint& ep, const std::string& route, const nlohmann::json& body,
                                const std::string& token, int timeout_ms) {
  httplib::Client cli(ep.origin);
  auto secs = timeout_ms / 1000;
  auto usecs = (timeout_ms % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  auto res = cli.Post(ep.prefix + route, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::ProviderUnavailable, ep.origin + ep.prefix + route + ": " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::ProviderUnavailable, ep.origin + ep.prefix + route + ": HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ProviderUnavailable, route + ": response is not JSON: " + e.what());
  }
}

}  // namespace detail

class HttpChatTransport final : public judge::ChatTransport {
 public:
  HttpChatTransport(const std::string& base_url, std::string token)
      : base_url_(base_url), endpoint_(split_base_url(base_url)), token_(std::move(token)) {}

  std::string id() const override { return "http-chat:" + base_url_; }

  std::string complete(const judge::ChatRequest& req) override {
    nlohmann::json body = {
        {"system", req.system}, {"user", req.user}, {"model", req.model}, {"temperature", req.temperature}};
    auto j = detail::post_json(endpoint_, "/chat", body, token_, req.timeout_ms);
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      throw Error(ErrorCode::ProviderUnavailable, "chat response lacks a string 'text' field");
    }
    return j["text"].get<std::string>();
  }

 private:
  std::string base_url_;
  Endpoint endpoint_;
  std::string token_;
};

class HttpEmbeddingProvider final : public semantic::EmbeddingProvider {
 public:
  HttpEmbeddingProvider(const std::string& base_url, std::string token, int timeout_ms = 30000, int max_retries = 2)
      : base_url_(base_url),
        endpoint_(split_base_url(base_url)),
        token_(std::move(token)),
        timeout_ms_(timeout_ms),
        max_retries_(max_retries) {}

  std::string id() const override { return "http-embed:" + base_url_; }

  std::vector<semantic::EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    for (int attempt = 0;; ++attempt) {
      try {
        return embed_once(texts);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable || attempt >= max_retries_) throw;
      }
    }
  }

 private:
  std::vector<semantic::EmbeddingVector> embed_once(const std::vector<std::string>& texts) {
    auto j = detail::post_json(endpoint_, "/embed", {{"texts", texts}}, token_, timeout_ms_);
    if (!j.is_object() || !j.contains("vectors") || !j["vectors"].is_array()) {
      throw Error(ErrorCode::ProviderUnavailable, "embed response lacks a 'vectors' array");
    }
    const auto& vs = j["vectors"];
    if (vs.size() != texts.size()) {
      throw Error(ErrorCode::ProviderUnavailable, "embed response has " + std::to_string(vs.size()) + " vectors for " +
                                                      std::to_string(texts.size()) + " texts");
    }
    std::vector<semantic::EmbeddingVector> out;
    std::size_t dim = 0;
    for (const auto& v : vs) {
      std::vector<double> values;
      try {
        values = v.get<std::vector<double>>();
      } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ProviderUnavailable, "embed vector is not a list of numbers");
      }
      if (values.empty()) throw Error(ErrorCode::ProviderUnavailable, "empty embedding vector");
      if (dim == 0) dim = values.size();
      if (values.size() != dim) throw Error(ErrorCode::DimensionMismatch, "embed response mixes vector dimensions");
      out.emplace_back(std::move(values));
    }
    return out;
  }

  std::string base_url_;
  Endpoint endpoint_;
  std::string token_;
  int timeout_ms_;
  int max_retries_;
};

}  // namespace bloomgate::providers
