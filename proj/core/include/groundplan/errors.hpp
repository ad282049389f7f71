#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace groundplan {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Validation,
  Generation,
  Io,
  Transport,
  BackendStatus,
  Timeout,
  EmptyCompletion,
  PlanParse,
  UnknownItem,
  DuplicateVote,
  ItemComplete,
  Storage,
  NotFound,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is
/// stable and is what the service maps onto `{code, message}` bodies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// A completion that could not be parsed into steps. Keeps the raw text.
class PlanParseError : public Error {
 public:
  explicit PlanParseError(std::string raw_text)
      : Error(ErrorCode::PlanParse, "no 'Step <n>' lines found in plan text"),
        raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

}  // namespace groundplan
