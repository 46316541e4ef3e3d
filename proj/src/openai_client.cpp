#include "httplib.h"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "agenteval/errors.hpp"
#include "agenteval/gateway.hpp"
#include "json.hpp"

namespace agenteval {

namespace {

struct Endpoint {
  std::string scheme_host_port;
  std::string path_prefix;
};

Endpoint split_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("base url needs a scheme: " + base_url);
  const auto path_begin = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.scheme_host_port = base_url.substr(0, path_begin);
  if (path_begin != std::string::npos) ep.path_prefix = base_url.substr(path_begin);
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  return ep;
}

std::string resolve_key(const OpenAiConfig& cfg) {
  if (!cfg.api_key.empty()) return cfg.api_key;
  const char* env = std::getenv("AGENTEVAL_API_KEY");
  return env == nullptr ? std::string{} : std::string(env);
}

nlohmann::json post_once(const OpenAiConfig& cfg, const std::string& route, const std::string& body) {
  const Endpoint ep = split_base_url(cfg.base_url);
  httplib::Client client(ep.scheme_host_port);
  client.set_connection_timeout(cfg.timeout);
  client.set_read_timeout(cfg.timeout);
  client.set_write_timeout(cfg.timeout);
  httplib::Headers headers;
  if (const std::string key = resolve_key(cfg); !key.empty()) {
    headers.emplace("Authorization", "Bearer " + key);
  }
  auto res = client.Post(ep.path_prefix + route, headers, body, "application/json");
  if (!res) {
    throw BackendError(BackendError::Kind::kTransport,
                       "transport failure: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendError::Kind::kStatus, "HTTP status " + std::to_string(res->status),
                       res->status, res->body);
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw BackendError(BackendError::Kind::kMalformed, "response body is not a JSON object", res->status,
                       res->body);
  }
  return j;
}

// Exponential backoff over retryable failures only; requests are idempotent.
nlohmann::json post_with_retry(const OpenAiConfig& cfg, const std::string& route, const std::string& body) {
  const int attempts = std::max(1, cfg.retry.max_attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      return post_once(cfg, route, body);
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= attempts) throw;
      const double scale = std::pow(cfg.retry.factor, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(
          cfg.retry.base_delay * scale));
    }
  }
}

}  // namespace

OpenAiChatClient::OpenAiChatClient(OpenAiConfig cfg) : cfg_(std::move(cfg)) { split_base_url(cfg_.base_url); }

ChatReply OpenAiChatClient::do_complete(const ChatRequest& req) {
  nlohmann::ordered_json body;
  body["model"] = req.model;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["temperature"] = req.temperature;
  body["seed"] = req.seed;

  const auto j = post_with_retry(cfg_, "/chat/completions", body.dump());
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw BackendError(BackendError::Kind::kMalformed, "message content is not a string");
    if (j.contains("usage") && j["usage"].contains("total_tokens") && j["usage"]["total_tokens"].is_number_unsigned()) {
      tokens_ += j["usage"]["total_tokens"].get<std::uint64_t>();
    }
    return {content.get<std::string>(), id(), false};
  } catch (const nlohmann::json::exception&) {
    throw BackendError(BackendError::Kind::kMalformed, "response lacks choices[0].message.content", 200, j.dump());
  }
}

OpenAiEmbeddingClient::OpenAiEmbeddingClient(OpenAiConfig cfg) : cfg_(std::move(cfg)) {
  split_base_url(cfg_.base_url);
}

std::vector<Embedding> OpenAiEmbeddingClient::do_embed(const EmbeddingRequest& req) {
  nlohmann::ordered_json body;
  body["model"] = req.model.empty() ? cfg_.embed_model : req.model;
  body["input"] = req.texts;
  const auto j = post_with_retry(cfg_, "/embeddings", body.dump());
  std::vector<Embedding> out;
  try {
    for (const auto& item : j.at("data")) out.push_back(item.at("embedding").get<Embedding>());
  } catch (const nlohmann::json::exception&) {
    throw BackendError(BackendError::Kind::kMalformed, "response lacks data[i].embedding", 200, j.dump());
  }
  return out;
}

}  // namespace agenteval
