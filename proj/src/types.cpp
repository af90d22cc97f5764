#include "evochain/types.hpp"

#include <algorithm>

namespace evochain {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::DuplicateTxId: return "DuplicateTxId";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NotAdmin: return "NotAdmin";
    case ErrorCode::DependencyViolation: return "DependencyViolation";
    case ErrorCode::DependencyExpiryViolation:
      return "DependencyExpiryViolation";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::AlreadyConsolidated: return "AlreadyConsolidated";
    case ErrorCode::AlreadyCanceled: return "AlreadyCanceled";
    case ErrorCode::NotOwner: return "NotOwner";
    case ErrorCode::InsufficientQuantity: return "InsufficientQuantity";
    case ErrorCode::AlreadyExists: return "AlreadyExists";
    case ErrorCode::DuplicateBottleId: return "DuplicateBottleId";
    case ErrorCode::ScenarioAssertionFailed: return "ScenarioAssertionFailed";
    case ErrorCode::CorruptLedger: return "CorruptLedger";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& message, std::string subject)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      subject_(std::move(subject)) {}

std::string_view to_string(Validity v) {
  switch (v) {
    case Validity::Pending: return "pending";
    case Validity::Consolidated: return "consolidated";
    case Validity::Canceled: return "canceled";
  }
  return "pending";
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Admin: return "admin";
    case Role::User: return "user";
    case Role::Observer: return "observer";
  }
  return "user";
}

Validity validity_from_string(std::string_view s) {
  if (s == "pending") return Validity::Pending;
  if (s == "consolidated") return Validity::Consolidated;
  if (s == "canceled") return Validity::Canceled;
  throw Error(ErrorCode::CorruptLedger,
              "unknown validity '" + std::string(s) + "'");
}

Role role_from_string(std::string_view s) {
  if (s == "admin") return Role::Admin;
  if (s == "user") return Role::User;
  if (s == "observer") return Role::Observer;
  throw Error(ErrorCode::ValidationFailed,
              "unknown role '" + std::string(s) + "'");
}

const TxId& record_id(const TransactionRecord& rec) {
  return std::visit([](const auto& tx) -> const TxId& { return tx.id; }, rec);
}

Timestamp record_submission_time(const TransactionRecord& rec) {
  return std::visit([](const auto& tx) { return tx.submission_time; }, rec);
}

bool is_mutable(const TransactionRecord& rec) {
  return std::holds_alternative<MutableTransaction>(rec);
}

const MutableTransaction* as_mutable(const TransactionRecord& rec) {
  return std::get_if<MutableTransaction>(&rec);
}

const CancelingTransaction* as_canceling(const TransactionRecord& rec) {
  return std::get_if<CancelingTransaction>(&rec);
}

MutableTransaction validity_transition(const MutableTransaction& tx,
                                       Validity target, Timestamp at) {
  if (target == Validity::Pending) {
    throw Error(ErrorCode::IllegalTransition,
                "cannot transition back to pending", tx.id.hex);
  }
  if (tx.validity != Validity::Pending) {
    throw Error(ErrorCode::IllegalTransition,
                std::string(to_string(tx.validity)) + " is terminal",
                tx.id.hex);
  }
  if (at < tx.submission_time) {
    throw Error(ErrorCode::IllegalTransition,
                "permanent_state_time precedes submission_time", tx.id.hex);
  }
  MutableTransaction out = tx;
  out.validity = target;
  out.permanent_state_time = at;
  return out;
}

std::vector<DependencyEdge> derive_dependencies(
    const MutableTransaction& tx,
    const std::function<std::optional<MutableTransaction>(const std::string&)>&
        latest_live_writer) {
  std::vector<DependencyEdge> edges;
  for (const auto& [key, body] : tx.writes) {
    auto prior = latest_live_writer(key);
    if (!prior) continue;  // fresh creation
    edges.push_back(DependencyEdge{tx.id, prior->id, key});
  }
  return edges;
}

}  // namespace evochain
