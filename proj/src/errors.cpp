#include "gesture_asr/errors.hpp"

#include <fmt/format.h>

namespace gesture_asr {

SyntaxError::SyntaxError(std::size_t line, std::size_t column, const std::string& message)
    : Error(fmt::format("{}:{}: {}", line, column, message)),
      line_(line),
      column_(column),
      message_(message) {}

InvalidThreshold::InvalidThreshold(double value)
    : Error(fmt::format("threshold {} outside [0, 1]", value)) {}

BackendError::BackendError(int status, std::string body)
    : ClientError(fmt::format("backend returned status {}: {}", status, body)),
      status_(status),
      body_(std::move(body)) {}

}  // namespace gesture_asr
