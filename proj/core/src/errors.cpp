#include "groundplan/errors.hpp"

namespace groundplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::Generation: return "generation_failure";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Transport: return "transport_error";
    case ErrorCode::BackendStatus: return "backend_status";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::EmptyCompletion: return "empty_completion";
    case ErrorCode::PlanParse: return "parse_failure";
    case ErrorCode::UnknownItem: return "unknown_item";
    case ErrorCode::DuplicateVote: return "duplicate_vote";
    case ErrorCode::ItemComplete: return "item_complete";
    case ErrorCode::Storage: return "storage_failure";
    case ErrorCode::NotFound: return "not_found";
  }
  return "unknown";
}

}  // namespace groundplan
