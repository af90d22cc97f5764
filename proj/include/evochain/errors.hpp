#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evochain {

enum class ErrorCode {
  IllegalTransition,
  DuplicateTxId,
  NotFound,
  NotAdmin,
  DependencyViolation,
  DependencyExpiryViolation,
  Unauthorized,
  ValidationFailed,
  AlreadyConsolidated,
  AlreadyCanceled,
  NotOwner,
  InsufficientQuantity,
  AlreadyExists,
  DuplicateBottleId,
  ScenarioAssertionFailed,
  CorruptLedger,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Domain error. `subject` carries the TxId or object key the error is about,
// e.g. the blocking transaction of an AlreadyConsolidated rejection.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace evochain
