#include "evochain/mutation_policy.hpp"

namespace evochain {

std::string_view to_string(PolicyKind k) {
  return k == PolicyKind::Expiration ? "expiration" : "condition";
}

PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "expiration") return PolicyKind::Expiration;
  if (s == "condition") return PolicyKind::Condition;
  throw Error(ErrorCode::ValidationFailed,
              "unknown policy kind '" + std::string(s) + "'");
}

bool is_expired(const MutableTransaction& tx, Timestamp now) {
  return now >= expiry_instant(tx);
}

std::optional<json> binding_value(const MutableTransaction& tx,
                                  const std::string& field) {
  for (const auto& [key, body] : tx.writes) {
    if (body.is_object() && body.contains(field)) {
      return body.at(field);
    }
  }
  return std::nullopt;
}

bool condition_satisfied(const MutableTransaction& pending,
                         const MutableTransaction& candidate,
                         const ConditionSpec& spec) {
  if (candidate.op_name != spec.trigger_op) return false;
  const auto trigger_value = binding_value(candidate, spec.trigger_field);
  const auto pending_value = binding_value(pending, spec.pending_field);
  return trigger_value && pending_value && *trigger_value == *pending_value;
}

bool authorize_cancel(const Principal& p, const MutableTransaction& target,
                      const CancelRule& rule) {
  if (p.role == Role::Observer) return false;
  if (rule.admin_any && p.role == Role::Admin && p.org == target.issuer.org) {
    return true;
  }
  return rule.self_cancel && target.issuer == p;
}

MutableTransaction raise_delay(const Principal& p,
                               const MutableTransaction& tx,
                               Duration new_delay,
                               std::span<const MutableTransaction> dependencies,
                               std::span<const MutableTransaction> dependents,
                               const PolicyLookup& policy_of) {
  if (p.role != Role::Admin) {
    throw Error(ErrorCode::NotAdmin, "only administrators may alter delays",
                tx.id.hex);
  }
  if (tx.validity != Validity::Pending) {
    throw Error(ErrorCode::IllegalTransition,
                "delay can only change while pending", tx.id.hex);
  }
  if (new_delay < tx.delay) {
    throw Error(ErrorCode::DependencyViolation,
                "delay can only be raised: lowering could make the "
                "transaction expire before transactions that depend on it",
                tx.id.hex);
  }
  const Timestamp new_expiry = tx.submission_time + new_delay;
  for (const auto& dep : dependencies) {
    if (dep.validity != Validity::Pending) continue;
    if (policy_of(dep.op_name).kind != PolicyKind::Expiration) continue;
    if (expiry_instant(dep) > new_expiry) {
      throw Error(ErrorCode::DependencyViolation,
                  "dependency " + dep.id.hex + " expires at " +
                      std::to_string(expiry_instant(dep)) +
                      ", after the requested expiry " +
                      std::to_string(new_expiry),
                  dep.id.hex);
    }
  }
  for (const auto& dependent : dependents) {
    if (dependent.validity != Validity::Pending) continue;
    if (policy_of(dependent.op_name).kind != PolicyKind::Expiration) continue;
    if (new_expiry > expiry_instant(dependent)) {
      throw Error(ErrorCode::DependencyViolation,
                  "dependent " + dependent.id.hex + " expires at " +
                      std::to_string(expiry_instant(dependent)) +
                      ", before the requested expiry " +
                      std::to_string(new_expiry),
                  dependent.id.hex);
    }
  }
  MutableTransaction out = tx;
  out.delay = new_delay;
  return out;
}

}  // namespace evochain
