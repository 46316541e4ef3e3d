#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace agenteval {

using PromptVars = std::map<std::string, std::string, std::less<>>;

// Replaces every {{name}}; an unknown placeholder is a FormatError.
std::string render_template(std::string_view tmpl, const PromptVars& vars);

// Versioned prompt templates loaded from a directory tree (critic/*.txt,
// quantifier/*.txt). Immutable after construction.
class PromptLibrary {
 public:
  explicit PromptLibrary(std::filesystem::path root);

  // $AGENTEVAL_PROMPT_DIR, else the prompts/ directory of the source tree.
  static PromptLibrary from_default_location();

  const std::string& get(std::string_view relative) const;
  std::string render(std::string_view relative, const PromptVars& vars) const {
    return render_template(get(relative), vars);
  }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace agenteval
