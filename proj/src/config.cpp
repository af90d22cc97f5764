#include "evochain/config.hpp"

#include <fstream>
#include <sstream>

namespace evochain {

namespace {

json cancel_rule_json(const CancelRule& r) {
  return json{{"admin_any", r.admin_any}, {"self_cancel", r.self_cancel}};
}

CancelRule cancel_rule_from(const json& j, const CancelRule& fallback) {
  CancelRule r = fallback;
  if (j.contains("admin_any")) r.admin_any = j.at("admin_any").get<bool>();
  if (j.contains("self_cancel")) {
    r.self_cancel = j.at("self_cancel").get<bool>();
  }
  return r;
}

}  // namespace

json policy_json(const MutationPolicy& p) {
  json j{{"kind", to_string(p.kind)},
         {"cancel_rule", cancel_rule_json(p.cancel_rule)}};
  if (p.kind == PolicyKind::Expiration) {
    j["delay"] = p.delay;
  } else if (p.condition) {
    j["condition"] = json{{"trigger_op", p.condition->trigger_op},
                          {"trigger_field", p.condition->trigger_field},
                          {"pending_field", p.condition->pending_field}};
  }
  return j;
}

MutationPolicy policy_from_json(const json& j, Duration default_delay,
                                const CancelRule& default_rule) {
  MutationPolicy p;
  p.kind = policy_kind_from_string(j.value("kind", "expiration"));
  p.cancel_rule = j.contains("cancel_rule")
                      ? cancel_rule_from(j.at("cancel_rule"), default_rule)
                      : default_rule;
  if (p.kind == PolicyKind::Expiration) {
    p.delay = j.value("delay", default_delay);
    if (p.delay < 0) {
      throw Error(ErrorCode::ValidationFailed, "policy delay must be >= 0");
    }
  } else {
    if (!j.contains("condition")) {
      throw Error(ErrorCode::ValidationFailed,
                  "condition policy requires a condition spec");
    }
    const auto& c = j.at("condition");
    p.condition = ConditionSpec{c.at("trigger_op").get<std::string>(),
                                c.at("trigger_field").get<std::string>(),
                                c.at("pending_field").get<std::string>()};
    p.delay = 0;
  }
  return p;
}

const MutationPolicy& AppConfig::policy_for(const std::string& op_name) const {
  auto it = op_policies.find(op_name);
  if (it != op_policies.end()) return it->second;
  auto cached = default_cache_.find(op_name);
  if (cached != default_cache_.end()) return cached->second;
  MutationPolicy p;
  p.kind = PolicyKind::Expiration;
  p.delay = default_delay;
  p.cancel_rule = default_cancel_rule;
  return default_cache_.emplace(op_name, std::move(p)).first->second;
}

std::optional<std::string> AppConfig::role_of_org(
    const std::string& org) const {
  auto it = org_roles.find(org);
  if (it == org_roles.end()) return std::nullopt;
  return it->second;
}

std::optional<Principal> AppConfig::find_principal(
    const std::string& name) const {
  for (const auto& p : principals) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

json AppConfig::to_json() const {
  json orgs = json::object();
  for (const auto& [org, role] : org_roles) orgs[org] = role;
  json policies = json::object();
  for (const auto& [op, policy] : op_policies) policies[op] = policy_json(policy);
  json people = json::array();
  for (const auto& p : principals) {
    people.push_back(json{{"name", p.name},
                          {"org", p.org},
                          {"role", std::string(to_string(p.role))}});
  }
  return json{{"default_cancel_rule", cancel_rule_json(default_cancel_rule)},
              {"default_delay", default_delay},
              {"op_policies", policies},
              {"org_roles", orgs},
              {"principals", people}};
}

AppConfig AppConfig::from_json(const json& j) {
  AppConfig cfg;
  cfg.default_delay = j.value("default_delay", Duration{300000});
  if (j.contains("default_cancel_rule")) {
    cfg.default_cancel_rule =
        cancel_rule_from(j.at("default_cancel_rule"), CancelRule{});
  }
  if (j.contains("org_roles")) {
    for (const auto& [org, role] : j.at("org_roles").items()) {
      cfg.org_roles[org] = role.get<std::string>();
    }
  }
  if (j.contains("op_policies")) {
    for (const auto& [op, policy] : j.at("op_policies").items()) {
      cfg.op_policies[op] = policy_from_json(policy, cfg.default_delay,
                                             cfg.default_cancel_rule);
    }
  }
  if (j.contains("principals")) {
    for (const auto& p : j.at("principals")) {
      cfg.principals.push_back(
          Principal{p.at("name").get<std::string>(),
                    p.at("org").get<std::string>(),
                    role_from_string(p.at("role").get<std::string>())});
    }
  }
  return cfg;
}

AppConfig AppConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ValidationFailed,
                "unparsable config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace evochain
