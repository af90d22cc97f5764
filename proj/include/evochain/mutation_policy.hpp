#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "evochain/types.hpp"

namespace evochain {

enum class PolicyKind { Expiration, Condition };

std::string_view to_string(PolicyKind k);
PolicyKind policy_kind_from_string(std::string_view s);

// A pending transaction with a condition policy consolidates when a later
// committed, non-canceled MT matches trigger_op and the key binding holds:
// the candidate's `trigger_field` equals the pending tx's `pending_field`.
// Binding values are read from the payload bodies (first written object,
// in key order, whose body carries the field).
struct ConditionSpec {
  std::string trigger_op;
  std::string trigger_field;
  std::string pending_field;

  bool operator==(const ConditionSpec&) const = default;
};

struct CancelRule {
  bool admin_any{true};    // ADMIN of the issuer's org may cancel
  bool self_cancel{true};  // the issuer may cancel their own tx

  bool operator==(const CancelRule&) const = default;
};

struct MutationPolicy {
  PolicyKind kind{PolicyKind::Expiration};
  Duration delay{0};  // expiration policies; copied onto the tx at issue
  std::optional<ConditionSpec> condition;
  CancelRule cancel_rule;

  bool operator==(const MutationPolicy&) const = default;
};

using PolicyLookup =
    std::function<const MutationPolicy&(const std::string& op_name)>;

// Inclusive boundary: expired exactly when now reaches submission + delay.
// Monotone in now since the clock never decreases.
bool is_expired(const MutableTransaction& tx, Timestamp now);

// Binding value of `field` in a transaction payload, if any.
std::optional<json> binding_value(const MutableTransaction& tx,
                                  const std::string& field);

bool condition_satisfied(const MutableTransaction& pending,
                         const MutableTransaction& candidate,
                         const ConditionSpec& spec);

// (ADMIN ∧ admin_any ∧ same org) ∨ (self_cancel ∧ issuer = principal).
// OBSERVER principals are never authorized.
bool authorize_cancel(const Principal& p, const MutableTransaction& target,
                      const CancelRule& rule);

// Admin-only delay raise on a pending transaction. Preserves the dependency
// expiry ordering on every edge touching tx: each expiration-policy pending
// dependency must still expire no later than tx, and tx must still expire no
// later than each expiration-policy pending dependent. Lowering is rejected
// because it could break the dependent-side ordering invisibly.
// Throws NotAdmin, IllegalTransition, DependencyViolation.
MutableTransaction raise_delay(const Principal& p,
                               const MutableTransaction& tx,
                               Duration new_delay,
                               std::span<const MutableTransaction> dependencies,
                               std::span<const MutableTransaction> dependents,
                               const PolicyLookup& policy_of);

}  // namespace evochain
