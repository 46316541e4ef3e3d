#include "agenteval/samples.hpp"

#include <set>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"
#include "json.hpp"

namespace agenteval {

namespace {

using nlohmann::json;

std::string scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

TaskSample sample_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("sample must be a JSON object");
  TaskSample s;
  for (const auto& [key, value] : j.items()) {
    if (key == "id") {
      if (!value.is_string()) throw FormatError("\"id\" must be a string");
      s.id = value.get<std::string>();
    } else if (key == "problem") {
      if (!value.is_string()) throw FormatError("\"problem\" must be a string");
      s.problem = value.get<std::string>();
    } else if (key == "messages") {
      if (!value.is_array()) throw FormatError("\"messages\" must be an array");
      for (const auto& m : value) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
            !m["role"].is_string() || !m["content"].is_string()) {
          throw FormatError("each message needs string \"role\" and \"content\"");
        }
        s.messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
      }
    } else if (key == "is_successful") {
      if (value.is_null()) continue;
      if (!value.is_boolean()) throw FormatError("\"is_successful\" must be a boolean");
      s.is_successful = value.get<bool>();
    } else if (key == "meta") {
      if (!value.is_object()) throw FormatError("\"meta\" must be an object");
      for (const auto& [mk, mv] : value.items()) s.meta[mk] = scalar_to_string(mv);
    } else if (!value.is_structured()) {
      s.meta[key] = scalar_to_string(value);
    }
  }
  if (s.id.empty()) throw FormatError("missing or empty \"id\"");
  if (!j.contains("messages")) throw FormatError("missing \"messages\"");
  if (s.messages.empty()) throw FormatError("\"messages\" is empty");
  if (!s.has_assistant_message()) throw FormatError("no assistant-role message");
  return s;
}

}  // namespace

bool TaskSample::has_assistant_message() const {
  for (const auto& m : messages) {
    if (m.role == "assistant") return true;
  }
  return false;
}

std::vector<TaskSample> parse_samples(std::string_view jsonl) {
  std::vector<TaskSample> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded()) throw FormatError("line " + std::to_string(line_no) + ": malformed JSON");
    TaskSample s;
    try {
      s = sample_from_json(j);
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(s.id).second) {
      throw FormatError("line " + std::to_string(line_no) + ": duplicate id \"" + s.id + "\"");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaskSample> load_samples(const std::filesystem::path& path) {
  return parse_samples(read_file(path));
}

std::string serialize_sample(const TaskSample& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["problem"] = s.problem;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : s.messages) {
    nlohmann::ordered_json mj;
    mj["role"] = m.role;
    mj["content"] = m.content;
    j["messages"].push_back(std::move(mj));
  }
  if (s.is_successful) j["is_successful"] = *s.is_successful;
  if (!s.meta.empty()) {
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.meta) meta[k] = v;
    j["meta"] = std::move(meta);
  }
  return j.dump();
}

std::string serialize_samples(const std::vector<TaskSample>& samples) {
  std::string out;
  for (const auto& s : samples) {
    out += serialize_sample(s);
    out += '\n';
  }
  return out;
}

std::string render_transcript(const std::vector<Message>& messages) {
  std::string out;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += "[" + messages[i].role + "]\n" + messages[i].content;
  }
  return out;
}

TaskSpec parse_task(std::string_view text) {
  const auto j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("task file must be a JSON object");
  TaskSpec t;
  if (j.contains("name") && j["name"].is_string()) t.name = j["name"].get<std::string>();
  if (!j.contains("description") || !j["description"].is_string()) {
    throw FormatError("task file: missing string \"description\"");
  }
  t.description = j["description"].get<std::string>();
  if (trim(t.description).empty()) throw FormatError("task file: description is empty");
  return t;
}

TaskSpec load_task(const std::filesystem::path& path) { return parse_task(read_file(path)); }

std::string serialize_task(const TaskSpec& task) {
  nlohmann::ordered_json j;
  j["name"] = task.name;
  j["description"] = task.description;
  return j.dump(2) + "\n";
}

}  // namespace agenteval
