#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

#include "gesture_asr/cli.hpp"

namespace {

volatile std::sig_atomic_t g_interrupted = 0;

void on_sigint(int) { g_interrupted = 1; }

}  // namespace

int main(int argc, char** argv) {
  auto cancel = std::make_shared<gesture_asr::clients::CancelSource>();
  std::signal(SIGINT, on_sigint);

  // The handler only sets a flag; this thread does the actual cancelling.
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done.load()) {
      if (g_interrupted) {
        cancel->cancel();
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });

  int code = gesture_asr::cli::run_cli(argc, argv, std::cout, std::cerr, cancel);
  done = true;
  watcher.join();
  return code;
}
