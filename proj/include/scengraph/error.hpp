#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scengraph {

enum class ErrorCode {
  InvalidArgument,
  DuplicateTerminal,
  UnknownAction,
  UnknownNode,
  UnknownPort,
  DuplicateEdge,
  UnknownParameter,
  ParseError,
  SchemaError,
  UnknownRule,
  IllegalElement,
  RecursiveModule,
  UnboundRole,
  BindingMismatch,
  InstanceConflict,
  DepthExceeded,
  UnknownModule,
  Conflict,
  NotFound,
  MissingDefault,
  LevelError,
  OutOfRange,
  InvalidScenario,
  UnsupportedAction,
  InvalidConfig,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the core; the code drives the C API status and
/// CLI exit status mapping.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace scengraph
