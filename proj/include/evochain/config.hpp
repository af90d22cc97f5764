#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evochain/mutation_policy.hpp"
#include "evochain/types.hpp"

namespace evochain {

// Application configuration: which supply-chain role each org plays, the
// mutation policy per operation, and the named principals the CLI can act
// as. Ops without an explicit policy get an expiration policy with
// default_delay and default_cancel_rule.
struct AppConfig {
  std::map<std::string, std::string> org_roles;
  std::map<std::string, MutationPolicy> op_policies;
  Duration default_delay{300000};
  CancelRule default_cancel_rule;
  std::vector<Principal> principals;

  const MutationPolicy& policy_for(const std::string& op_name) const;
  std::optional<std::string> role_of_org(const std::string& org) const;
  std::optional<Principal> find_principal(const std::string& name) const;

  json to_json() const;
  static AppConfig from_json(const json& j);
  static AppConfig load_file(const std::filesystem::path& path);

 private:
  mutable std::map<std::string, MutationPolicy> default_cache_;
};

json policy_json(const MutationPolicy& p);
MutationPolicy policy_from_json(const json& j, Duration default_delay,
                                const CancelRule& default_rule);

}  // namespace evochain
