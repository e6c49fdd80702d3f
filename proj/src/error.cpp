#include "scengraph/error.hpp"

namespace scengraph {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DuplicateTerminal: return "DuplicateTerminal";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownPort: return "UnknownPort";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownRule: return "UnknownRule";
    case ErrorCode::IllegalElement: return "IllegalElement";
    case ErrorCode::RecursiveModule: return "RecursiveModule";
    case ErrorCode::UnboundRole: return "UnboundRole";
    case ErrorCode::BindingMismatch: return "BindingMismatch";
    case ErrorCode::InstanceConflict: return "InstanceConflict";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::UnknownModule: return "UnknownModule";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::MissingDefault: return "MissingDefault";
    case ErrorCode::LevelError: return "LevelError";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::UnsupportedAction: return "UnsupportedAction";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace scengraph
