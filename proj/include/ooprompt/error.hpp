#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ooprompt/json.hpp"

namespace ooprompt {

enum class ErrorCode {
  // core model
  DuplicateName,
  EmptyName,
  UnknownObject,
  UnknownProperty,
  InvariantViolation,
  AlreadyNested,
  NotNested,
  ChildTooDeep,
  InvalidPermutation,
  // templates
  UnknownTemplate,
  UnknownDefault,
  NestedNotTemplatable,
  DuplicateTemplateId,
  EmptyLibrary,
  // assistants
  ProviderUnavailable,
  MalformedResponse,
  Timeout,
  // intent mapping
  EmptyInput,
  NotTextValued,
  PreconditionFailed,
  UnknownProposal,
  // deployment
  CycleDetected,
  NoSequentialGroup,
  // versioning
  UnknownVersion,
  NeverExisted,
  // evaluation
  UnknownRun,
  // workspace / service
  CorruptFile,
  SchemaVersionMismatch,
  VersionConflict,
  WorkspaceLocked,
  InvalidArgument,
  IoError,
  UnknownRoute,
  Unauthorized,
};

std::string_view to_string(ErrorCode code);

/// Coarse error class; drives CLI exit codes and HTTP status mapping.
enum class ErrorClass { User, NotFound, Conflict, Provider, Io, Auth };

ErrorClass classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, Json details = Json::object());

  ErrorCode code() const noexcept { return code_; }
  const Json& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  Json details_;
};

}  // namespace ooprompt
