#include "ooprompt/error.hpp"

namespace ooprompt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::AlreadyNested: return "AlreadyNested";
    case ErrorCode::NotNested: return "NotNested";
    case ErrorCode::ChildTooDeep: return "ChildTooDeep";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::UnknownDefault: return "UnknownDefault";
    case ErrorCode::NestedNotTemplatable: return "NestedNotTemplatable";
    case ErrorCode::DuplicateTemplateId: return "DuplicateTemplateId";
    case ErrorCode::EmptyLibrary: return "EmptyLibrary";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NotTextValued: return "NotTextValued";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::UnknownProposal: return "UnknownProposal";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NoSequentialGroup: return "NoSequentialGroup";
    case ErrorCode::UnknownVersion: return "UnknownVersion";
    case ErrorCode::NeverExisted: return "NeverExisted";
    case ErrorCode::UnknownRun: return "UnknownRun";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::VersionConflict: return "VersionConflict";
    case ErrorCode::WorkspaceLocked: return "WorkspaceLocked";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownRoute: return "UnknownRoute";
    case ErrorCode::Unauthorized: return "Unauthorized";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownObject:
    case ErrorCode::UnknownProperty:
    case ErrorCode::UnknownTemplate:
    case ErrorCode::UnknownDefault:
    case ErrorCode::UnknownProposal:
    case ErrorCode::UnknownVersion:
    case ErrorCode::UnknownRun:
    case ErrorCode::NeverExisted:
    case ErrorCode::UnknownRoute:
      return ErrorClass::NotFound;
    case ErrorCode::Unauthorized:
      return ErrorClass::Auth;
    case ErrorCode::VersionConflict:
      return ErrorClass::Conflict;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::MalformedResponse:
    case ErrorCode::Timeout:
      return ErrorClass::Provider;
    case ErrorCode::CorruptFile:
    case ErrorCode::SchemaVersionMismatch:
    case ErrorCode::WorkspaceLocked:
    case ErrorCode::IoError:
      return ErrorClass::Io;
    default:
      return ErrorClass::User;
  }
}

Error::Error(ErrorCode code, const std::string& message, Json details)
    : std::runtime_error(message), code_(code), details_(std::move(details)) {}

}  // namespace ooprompt
