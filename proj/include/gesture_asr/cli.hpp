#pragma once

#include <iosfwd>
#include <memory>

#include "gesture_asr/http_clients.hpp"

namespace gesture_asr::cli {

enum ExitCode : int { kOk = 0, kItemFailures = 1, kUsage = 2 };

/// Entry point of the `gesture-asr` tool. Machine output goes to `out`,
/// diagnostics to `err`. `cancel`, when given, is shared with every remote client
/// so a signal handler can stop in-flight requests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            std::shared_ptr<clients::CancelSource> cancel = nullptr);

}  // namespace gesture_asr::cli
