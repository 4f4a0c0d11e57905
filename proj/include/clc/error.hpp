#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clc {

enum class ErrorCode {
  UnknownParent,
  DuplicateBlock,
  UnknownBlock,
  ChainTooShort,
  DisconnectedChain,
  BadCertificate,
  NonMonotoneCheckpoint,
  StaleIteration,
  Offline,
  NoOnlineCheckpointers,
  UnresolvableValue,
  SenderOffline,
  ScenarioInvalid,
  ConfigError,
  IoError,
  TruncatedTrace,
  TraceFormat,
  VariantRequired,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clc
