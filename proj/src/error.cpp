#include "clc/error.hpp"

namespace clc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::DuplicateBlock: return "DuplicateBlock";
    case ErrorCode::UnknownBlock: return "UnknownBlock";
    case ErrorCode::ChainTooShort: return "ChainTooShort";
    case ErrorCode::DisconnectedChain: return "DisconnectedChain";
    case ErrorCode::BadCertificate: return "BadCertificate";
    case ErrorCode::NonMonotoneCheckpoint: return "NonMonotoneCheckpoint";
    case ErrorCode::StaleIteration: return "StaleIteration";
    case ErrorCode::Offline: return "Offline";
    case ErrorCode::NoOnlineCheckpointers: return "NoOnlineCheckpointers";
    case ErrorCode::UnresolvableValue: return "UnresolvableValue";
    case ErrorCode::SenderOffline: return "SenderOffline";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::TruncatedTrace: return "TruncatedTrace";
    case ErrorCode::TraceFormat: return "TraceFormat";
    case ErrorCode::VariantRequired: return "VariantRequired";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code) {}

}  // namespace clc
