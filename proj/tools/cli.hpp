#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agenteval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitPipeline = 2;

// args excludes the program name. Output goes to out, diagnostics to err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agenteval::cli
