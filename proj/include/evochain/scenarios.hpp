#pragma once

#include <string>
#include <vector>

#include "evochain/types.hpp"

namespace evochain::app {

struct ScenarioStep {
  std::string name;
  bool ok{false};
  std::string detail;
};

struct ScenarioReport {
  std::string scenario;
  std::vector<ScenarioStep> steps;

  bool ok() const;
  json to_json() const;
};

// Cascading-recovery walkthrough over the generic asset app, three clients:
// an admin issues the cancel, an observer queries, a user issues. Create a,
// query a, cancel, query empty, create b, query b.
ScenarioReport run_recovery_walkthrough();

// Threat drills: user mistake, tricked user, stolen credentials, contract
// misuse. Recovery is self-cancel or admin cancel of the principal's pending
// transactions; consolidated attacker transactions stay (residual risk,
// asserted as the expected AlreadyConsolidated rejection).
ScenarioReport run_threat_scenarios();

}  // namespace evochain::app
