#include "agenteval/gateway.hpp"

#include <cmath>
#include <ctime>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"
#include "json.hpp"

namespace agenteval {

namespace fs = std::filesystem;

void check_request(const ChatRequest& req) {
  if (req.messages.empty()) throw PreconditionError("chat request has no messages");
  for (const auto& m : req.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw PreconditionError("chat request has invalid role \"" + m.role + "\"");
    }
  }
  if (!(req.temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
}

std::string canonical_request(const ChatRequest& req) {
  nlohmann::ordered_json j;
  j["model"] = req.model;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : req.messages) {
    nlohmann::ordered_json mj;
    mj["role"] = m.role;
    mj["content"] = m.content;
    j["messages"].push_back(std::move(mj));
  }
  j["temperature"] = req.temperature;
  j["seed"] = req.seed;
  return j.dump();
}

std::string request_digest(const ChatRequest& req) { return sha256_hex(canonical_request(req)); }

std::string cache_key(std::string_view backend_id, const ChatRequest& req) {
  std::string material(backend_id);
  material += '\n';
  material += canonical_request(req);
  return sha256_hex(material);
}

std::vector<Embedding> EmbeddingProvider::embed(const EmbeddingRequest& req) {
  if (req.texts.empty()) throw PreconditionError("embedding request has no texts");
  for (const auto& t : req.texts) {
    if (trim(t).empty()) throw PreconditionError("embedding request contains an empty text");
  }
  auto out = do_embed(req);
  if (out.size() != req.texts.size()) {
    throw BackendError(BackendError::Kind::kMalformed, "embedding count does not match input count");
  }
  for (const auto& v : out) {
    if (v.empty() || v.size() != out.front().size()) {
      throw BackendError(BackendError::Kind::kMalformed, "embedding dimension mismatch");
    }
  }
  return out;
}

Embedding lexical_embedding(std::string_view text) {
  std::string norm = " ";
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && norm.size() > 1) norm.push_back(' ');
    pending_space = false;
    norm.push_back(static_cast<char>(std::tolower(c)));
  }
  norm.push_back(' ');

  Embedding v(LexicalEmbedding::kDimension, 0.0);
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
    v[fnv1a64(std::string_view(norm).substr(i, 3)) % LexicalEmbedding::kDimension] += 1.0;
  }
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
  }
  return v;
}

std::vector<Embedding> LexicalEmbedding::do_embed(const EmbeddingRequest& req) {
  std::vector<Embedding> out;
  out.reserve(req.texts.size());
  for (const auto& t : req.texts) out.push_back(lexical_embedding(t));
  return out;
}

namespace {

struct VocabEntry {
  const char* name;
  const char* description;
  std::array<const char*, 3> values;
};

// Generic rubric dimensions the hash mock draws from when asked for criteria.
constexpr std::array<VocabEntry, 12> kMockVocabulary{{
    {"Clarity", "How easy the response is to follow from start to finish.",
     {"Unclear", "Somewhat Clear", "Clear"}},
    {"Correctness", "Whether the final answer and intermediate results are right.",
     {"Incorrect", "Partially Correct", "Correct"}},
    {"Conciseness", "Absence of redundant or irrelevant material in the response.",
     {"Verbose", "Adequate", "Concise"}},
    {"Method Choice", "Suitability of the chosen technique for this kind of problem.",
     {"Poor", "Reasonable", "Ideal"}},
    {"Justification", "Whether each step is supported by an explicit reason.",
     {"Unjustified", "Partly Justified", "Fully Justified"}},
    {"Code Quality", "Readability and correctness of any code included in the answer.",
     {"Low", "Medium", "High"}},
    {"Notation", "Consistent and conventional use of symbols and units.",
     {"Inconsistent", "Mostly Consistent", "Consistent"}},
    {"Verification", "Whether the answer is checked by substitution or a second route.",
     {"None", "Partial", "Thorough"}},
    {"Structure", "Logical ordering of the steps that lead to the answer.",
     {"Disorganized", "Mostly Organized", "Well Organized"}},
    {"Completeness", "Coverage of every part the task asks for.",
     {"Incomplete", "Mostly Complete", "Complete"}},
    {"Instruction Following", "Adherence to the format and constraints stated in the task.",
     {"Ignored", "Partial", "Followed"}},
    {"Efficiency", "Economy of steps and computation on the way to the answer.",
     {"Inefficient", "Moderate", "Efficient"}},
}};

// A quantifier prompt embeds a JSON object mapping each criterion name to an
// object with "accepted_values"; returns it when present.
std::optional<nlohmann::json> find_criteria_block(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto obj = first_json_object(std::string_view(text).substr(pos));
    if (!obj) return std::nullopt;
    const auto j = nlohmann::json::parse(*obj);
    bool shaped = !j.empty();
    for (const auto& [k, v] : j.items()) {
      if (!v.is_object() || !v.contains("accepted_values") || !v["accepted_values"].is_array() ||
          v["accepted_values"].empty()) {
        shaped = false;
        break;
      }
    }
    if (shaped) return j;
    pos = text.find(*obj, pos) + 1;
  }
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ChatReply HashMockBackend::do_complete(const ChatRequest& req) {
  const std::string digest = request_digest(req);
  SplitMix64 rng(fnv1a64(digest));
  const std::string& last = req.messages.back().content;

  nlohmann::ordered_json reply;
  if (auto block = find_criteria_block(last)) {
    reply = nlohmann::ordered_json::object();
    for (const auto& [name, spec] : block->items()) {
      const auto& values = spec["accepted_values"];
      reply[name] = values[static_cast<std::size_t>(rng.below(values.size()))];
    }
  } else {
    const auto order = seeded_permutation(kMockVocabulary.size(), rng);
    const std::size_t count = 3 + static_cast<std::size_t>(rng.below(3));
    reply = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < count; ++i) {
      const auto& e = kMockVocabulary[order[i]];
      nlohmann::ordered_json c;
      c["name"] = e.name;
      c["description"] = e.description;
      c["accepted_values"] = {e.values[0], e.values[1], e.values[2]};
      reply.push_back(std::move(c));
    }
  }
  return {reply.dump(), id(), false};
}

ScriptedMockBackend::ScriptedMockBackend(fs::path dir) : dir_(std::move(dir)) {
  if (!fs::is_directory(dir_)) throw IoError("scripted fixture directory not found: " + dir_.string());
}

fs::path ScriptedMockBackend::fixture_path(const fs::path& dir, const ChatRequest& req) {
  return dir / (request_digest(req) + ".txt");
}

ChatReply ScriptedMockBackend::do_complete(const ChatRequest& req) {
  const fs::path path = fixture_path(dir_, req);
  std::error_code ec;
  if (!fs::exists(path, ec)) {
    throw BackendError(BackendError::Kind::kMissingFixture,
                       "no scripted reply for request digest " + request_digest(req));
  }
  return {read_file(path), id(), false};
}

RecordingBackend::RecordingBackend(std::shared_ptr<ChatBackend> inner, fs::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {}

ChatReply RecordingBackend::do_complete(const ChatRequest& req) {
  ChatReply reply = inner_->complete_chat(req);
  write_file_atomic(ScriptedMockBackend::fixture_path(dir_, req), reply.content);
  return reply;
}

CachingBackend::CachingBackend(std::shared_ptr<ChatBackend> inner, fs::path cache_dir)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)) {}

fs::path CachingBackend::entry_path(const ChatRequest& req) const {
  const std::string key = cache_key(inner_->id(), req);
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::mutex& CachingBackend::stripe(std::string_view key) {
  return stripes_[fnv1a64(key) % stripes_.size()];
}

ChatReply CachingBackend::do_complete(const ChatRequest& req) {
  const fs::path path = entry_path(req);
  std::lock_guard lock(stripe(path.filename().string()));
  std::error_code ec;
  if (fs::exists(path, ec)) {
    const auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (!j.is_discarded() && j.contains("content") && j["content"].is_string()) {
      ++hits_;
      return {j["content"].get<std::string>(), inner_->id(), true};
    }
  }
  ++misses_;
  ChatReply reply = inner_->complete_chat(req);
  nlohmann::ordered_json entry;
  entry["request_digest"] = request_digest(req);
  entry["timestamp"] = utc_timestamp();
  entry["content"] = reply.content;
  write_file_atomic(path, entry.dump(2) + "\n");
  reply.cached = false;
  return reply;
}

}  // namespace agenteval
