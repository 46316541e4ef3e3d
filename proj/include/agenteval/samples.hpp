#pragma once
// Task descriptions and execution logs (the samples under assessment).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agenteval {

struct Message {
  std::string role;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct TaskSample {
  std::string id;
  std::string problem;
  std::vector<Message> messages;
  std::optional<bool> is_successful;  // report-time grouping only
  std::map<std::string, std::string> meta;

  bool has_assistant_message() const;

  friend bool operator==(const TaskSample&, const TaskSample&) = default;
};

struct TaskSpec {
  std::string name;
  std::string description;
};

// One sample per JSONL line, order preserved. Unknown top-level scalar fields
// ("level", "type", "time", ...) are folded into meta as strings. Errors name
// the 1-based line.
std::vector<TaskSample> parse_samples(std::string_view jsonl);
std::vector<TaskSample> load_samples(const std::filesystem::path& path);

// Canonical compact line, no trailing newline.
std::string serialize_sample(const TaskSample& s);
std::string serialize_samples(const std::vector<TaskSample>& samples);

// "[role]\ncontent" blocks separated by blank lines, as shown to models.
std::string render_transcript(const std::vector<Message>& messages);

TaskSpec parse_task(std::string_view text);
TaskSpec load_task(const std::filesystem::path& path);
std::string serialize_task(const TaskSpec& task);

}  // namespace agenteval
