#pragma once
// Chat-completion and embedding backends.
//
// Every backend goes through the same non-virtual entry point, which checks
// the request before dispatch. Implementations:
//   OpenAiChatClient / OpenAiEmbeddingClient  OpenAI-compatible HTTP API
//   HashMockBackend      reply derived from the request digest (load tests)
//   ScriptedMockBackend  replies read from {dir}/{request digest}.txt
//   CachingBackend       content-addressed disk cache around any backend
//   RecordingBackend     writes scripted fixtures while forwarding
//   LexicalEmbedding     offline character-trigram hashing embedder

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "agenteval/samples.hpp"

namespace agenteval {

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

struct ChatReply {
  std::string content;
  std::string backend_id;
  bool cached = false;
};

struct EmbeddingRequest {
  std::vector<std::string> texts;
  std::string model;
};

using Embedding = std::vector<double>;

// Throws PreconditionError on empty messages, bad roles or negative temperature.
void check_request(const ChatRequest& req);

// Canonical JSON of (model, messages, temperature, seed); its SHA-256 is the
// request digest used to key scripted fixtures.
std::string canonical_request(const ChatRequest& req);
std::string request_digest(const ChatRequest& req);
// Cache key additionally folds in the backend id.
std::string cache_key(std::string_view backend_id, const ChatRequest& req);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;

  ChatReply complete_chat(const ChatRequest& req) {
    check_request(req);
    return do_complete(req);
  }

 protected:
  virtual ChatReply do_complete(const ChatRequest& req) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;

  // One vector per text, all the same dimension.
  std::vector<Embedding> embed(const EmbeddingRequest& req);

 protected:
  virtual std::vector<Embedding> do_embed(const EmbeddingRequest& req) = 0;
};

// Lower-case, collapse whitespace, pad with one space each side, hash each
// byte trigram (FNV-1a 64) into kDimension buckets, count, L2-normalize.
Embedding lexical_embedding(std::string_view text);

class LexicalEmbedding final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 512;
  std::string id() const override { return "lexical-trigram-512"; }

 protected:
  std::vector<Embedding> do_embed(const EmbeddingRequest& req) override;
};

class HashMockBackend final : public ChatBackend {
 public:
  std::string id() const override { return "mock-hash"; }

 protected:
  ChatReply do_complete(const ChatRequest& req) override;
};

class ScriptedMockBackend final : public ChatBackend {
 public:
  explicit ScriptedMockBackend(std::filesystem::path dir);
  std::string id() const override { return "mock-scripted"; }

  static std::filesystem::path fixture_path(const std::filesystem::path& dir, const ChatRequest& req);

 protected:
  ChatReply do_complete(const ChatRequest& req) override;

 private:
  std::filesystem::path dir_;
};

class RecordingBackend final : public ChatBackend {
 public:
  RecordingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path dir);
  std::string id() const override { return inner_->id(); }

 protected:
  ChatReply do_complete(const ChatRequest& req) override;

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path dir_;
};

// {cache_dir}/{first2hex}/{digest}.json = {"request_digest","timestamp","content"}
class CachingBackend final : public ChatBackend {
 public:
  CachingBackend(std::shared_ptr<ChatBackend> inner, std::filesystem::path cache_dir);
  std::string id() const override { return inner_->id(); }

  std::filesystem::path entry_path(const ChatRequest& req) const;
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 protected:
  ChatReply do_complete(const ChatRequest& req) override;

 private:
  std::mutex& stripe(std::string_view key);

  std::shared_ptr<ChatBackend> inner_;
  std::filesystem::path dir_;
  std::array<std::mutex, 64> stripes_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
};

struct OpenAiConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;   // AGENTEVAL_API_KEY when empty
  std::string embed_model = "text-embedding-ada-002";  // used when a request names none
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

class OpenAiChatClient final : public ChatBackend {
 public:
  explicit OpenAiChatClient(OpenAiConfig cfg);
  std::string id() const override { return "openai:" + cfg_.base_url; }
  std::uint64_t tokens_used() const { return tokens_; }

 protected:
  ChatReply do_complete(const ChatRequest& req) override;

 private:
  OpenAiConfig cfg_;
  std::atomic<std::uint64_t> tokens_{0};
};

class OpenAiEmbeddingClient final : public EmbeddingProvider {
 public:
  explicit OpenAiEmbeddingClient(OpenAiConfig cfg);
  std::string id() const override { return "openai-embed:" + cfg_.base_url; }

 protected:
  std::vector<Embedding> do_embed(const EmbeddingRequest& req) override;

 private:
  OpenAiConfig cfg_;
};

}  // namespace agenteval
