#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "agenteval/parallel.hpp"
#include "cli.hpp"

namespace {

constexpr auto kDrainTimeout = std::chrono::seconds(5);

extern "C" void on_sigint(int) { agenteval::request_cancel(); }

// After Ctrl-C the pipeline stops dispatching and waits for in-flight
// requests; give up on them after kDrainTimeout.
void start_watchdog() {
  std::thread([] {
    while (!agenteval::cancel_requested()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    std::this_thread::sleep_for(kDrainTimeout);
    std::cerr << "cancelled: in-flight requests did not drain\n";
    std::_Exit(agenteval::cli::kExitPipeline);
  }).detach();
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_sigint);
  start_watchdog();
  const std::vector<std::string> args(argv + 1, argv + argc);
  return agenteval::cli::run_command(args, std::cout, std::cerr);
}
