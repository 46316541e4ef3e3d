#include "agenteval/prompts.hpp"

#include <cstdlib>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"

#ifndef AGENTEVAL_DEFAULT_PROMPT_DIR
#define AGENTEVAL_DEFAULT_PROMPT_DIR "prompts"
#endif

namespace agenteval {

namespace fs = std::filesystem;

std::string render_template(std::string_view tmpl, const PromptVars& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw FormatError("unterminated placeholder in prompt template");
    out.append(tmpl.substr(pos, open - pos));
    const std::string_view key = tmpl.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) throw FormatError("prompt placeholder {{" + std::string(key) + "}} has no value");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

PromptLibrary::PromptLibrary(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) throw IoError("prompt directory not found: " + root_.string());
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    templates_.emplace(fs::relative(entry.path(), root_).generic_string(), read_file(entry.path()));
  }
}

PromptLibrary PromptLibrary::from_default_location() {
  if (const char* env = std::getenv("AGENTEVAL_PROMPT_DIR"); env != nullptr && *env != '\0') {
    return PromptLibrary(env);
  }
  return PromptLibrary(AGENTEVAL_DEFAULT_PROMPT_DIR);
}

const std::string& PromptLibrary::get(std::string_view relative) const {
  auto it = templates_.find(relative);
  if (it == templates_.end()) {
    throw IoError("prompt template " + std::string(relative) + " not found under " + root_.string());
  }
  return it->second;
}

}  // namespace agenteval
