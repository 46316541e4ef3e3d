#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "agenteval/gateway.hpp"
#include "agenteval/prompts.hpp"

namespace agenteval {

// What an LLM-backed stage needs: a backend, the prompt templates and the
// request defaults. Temperature stays 0; the seed is the re-sampling lever.
struct AgentContext {
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<const PromptLibrary> prompts;
  std::string model = "gpt-4-0613";
  double temperature = 0.0;
  std::size_t parallelism = 4;
};

}  // namespace agenteval
