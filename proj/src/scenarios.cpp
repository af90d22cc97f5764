#include "evochain/scenarios.hpp"

#include <functional>
#include <utility>

#include "evochain/view_engine.hpp"
#include "evochain/winetracker.hpp"

namespace evochain::app {

namespace {

void step(ScenarioReport& report, const std::string& name,
          const std::function<std::string()>& body) {
  ScenarioStep s;
  s.name = name;
  try {
    s.detail = body();
    s.ok = true;
  } catch (const Error& e) {
    s.detail = e.what();
  }
  report.steps.push_back(std::move(s));
}

void expect_error(ScenarioReport& report, const std::string& name,
                  ErrorCode code, const std::function<void()>& body) {
  ScenarioStep s;
  s.name = name;
  try {
    body();
    s.detail = "expected " + std::string(to_string(code)) + ", got success";
  } catch (const Error& e) {
    if (e.code() == code) {
      s.ok = true;
      s.detail = e.what();
    } else {
      s.detail = std::string("expected ") + std::string(to_string(code)) +
                 ", got " + e.what();
    }
  }
  report.steps.push_back(std::move(s));
}

void require(bool condition, const std::string& message) {
  if (!condition) {
    throw Error(ErrorCode::ScenarioAssertionFailed, message);
  }
}

}  // namespace

bool ScenarioReport::ok() const {
  for (const auto& s : steps) {
    if (!s.ok) return false;
  }
  return !steps.empty();
}

json ScenarioReport::to_json() const {
  json out = {{"scenario", scenario}, {"ok", ok()}, {"steps", json::array()}};
  for (const auto& s : steps) {
    out["steps"].push_back(
        {{"name", s.name}, {"ok", s.ok}, {"detail", s.detail}});
  }
  return out;
}

ScenarioReport run_recovery_walkthrough() {
  ScenarioReport report;
  report.scenario = "recovery-walkthrough";

  AppConfig config;
  config.default_delay = 300000;
  const Principal admin{"client1", "orgA", Role::Admin};
  const Principal observer{"client2", "orgB", Role::Observer};
  const Principal user{"client3", "orgA", Role::User};
  config.principals = {admin, observer, user};

  AppRegistry registry;
  register_asset_ops(registry);
  EvoEngine engine(LedgerStore{}, std::move(config), std::move(registry));

  TxId create_a;
  step(report, "client3 creates asset a", [&] {
    auto receipt = engine.issue_transaction(
        user, "createAsset", {{"id", "a"}, {"value", "v1"}});
    create_a = receipt.tx_id;
    return "committed " + receipt.tx_id.hex + " at height " +
           std::to_string(receipt.block_height);
  });

  step(report, "client2 queries asset a", [&] {
    auto view = engine.get_asset(asset_key("a"));
    require(view.has_value(), "asset a should be visible");
    require(view->body["value"] == "v1", "asset a should hold v1");
    return "view: " + view->body.dump();
  });

  expect_error(report, "client2 cannot issue transactions",
               ErrorCode::Unauthorized, [&] {
                 engine.issue_transaction(observer, "updateAsset",
                                          {{"id", "a"}, {"value", "x"}});
               });

  step(report, "client1 cancels the pending create", [&] {
    auto outcome = engine.cancel_transaction(admin, create_a);
    require(outcome.cascade_set.size() == 1, "cascade should be the target");
    return "canceled " + std::to_string(outcome.cascade_set.size()) +
           " transaction(s)";
  });

  step(report, "asset a is gone from the view", [&] {
    auto view = engine.get_asset(asset_key("a"));
    require(!view.has_value(), "asset a should be absent after the cancel");
    return "no view for asset a";
  });

  step(report, "client3 creates asset b", [&] {
    auto receipt = engine.issue_transaction(
        user, "createAsset", {{"id", "b"}, {"value", "v2"}});
    return "committed " + receipt.tx_id.hex;
  });

  step(report, "asset b is visible", [&] {
    auto view = engine.get_asset(asset_key("b"));
    require(view.has_value(), "asset b should be visible");
    require(view->body["value"] == "v2", "asset b should hold v2");
    return "view: " + view->body.dump();
  });

  step(report, "the key a is reusable after the cancel", [&] {
    engine.issue_transaction(user, "createAsset",
                             {{"id", "a"}, {"value", "v3"}});
    auto view = engine.get_asset(asset_key("a"));
    require(view.has_value() && view->body["value"] == "v3",
            "asset a should hold v3 after re-creation");
    return "view: " + view->body.dump();
  });

  step(report, "hash chain verifies", [&] {
    auto check = engine.store().verify_chain();
    require(check.ok, check.detail);
    return std::to_string(engine.store().height() + 1) + " blocks verified";
  });

  return report;
}

ScenarioReport run_threat_scenarios() {
  ScenarioReport report;
  report.scenario = "threat-scenarios";

  const Duration delay = 300000;
  auto config = default_winetracker_config(delay);
  auto registry = default_registry();
  EvoEngine engine(LedgerStore{}, std::move(config), std::move(registry));

  const Principal grower{"grower-coop-user", "grower-coop", Role::User};
  const Principal grower_admin{"grower-coop-admin", "grower-coop",
                               Role::Admin};
  const Principal producer{"vintner-user", "vintner", Role::User};
  const Principal producer_admin{"vintner-admin", "vintner", Role::Admin};

  step(report, "baseline: grower creates four batches", [&] {
    for (const auto& [batch, quantity] :
         std::vector<std::pair<std::string, int>>{
             {"g1", 100}, {"g2", 80}, {"g3", 60}, {"g4", 40}}) {
      engine.issue_transaction(grower, "createGrapes",
                               {{"batch_id", batch}, {"quantity", quantity}});
    }
    return "g1..g4 created";
  });

  step(report, "baseline: g3 and g4 sold to the producer", [&] {
    engine.issue_transaction(grower, "sellGrapes",
                             {{"batch_id", "g3"}, {"to", "vintner"}});
    engine.issue_transaction(grower, "sellGrapes",
                             {{"batch_id", "g4"}, {"to", "vintner"}});
    return "g3, g4 owned by vintner";
  });

  step(report, "baseline consolidates after the delay", [&] {
    engine.advance_by(delay + 1);
    for (const char* batch : {"g1", "g2", "g3", "g4"}) {
      auto history = engine.get_transactions(grapes_key(batch));
      for (const auto& tx : history) {
        require(tx.validity == Validity::Consolidated,
                "baseline tx should be consolidated");
      }
    }
    return "all baseline transactions consolidated";
  });

  // A1: user mistake. The issuer notices a wrong buyer and self-cancels.
  TxId mistake;
  step(report, "A1: user sells g1 to the wrong org", [&] {
    auto receipt = engine.issue_transaction(
        grower, "sellGrapes", {{"batch_id", "g1"}, {"to", "merchant"}});
    mistake = receipt.tx_id;
    auto view = engine.get_asset(grapes_key("g1"));
    require(view && view->body["owner"] == "merchant",
            "pending sale should be visible");
    return "pending sale " + mistake.hex;
  });

  step(report, "A1: issuer self-cancels, view restored", [&] {
    auto outcome = engine.cancel_transaction(grower, mistake);
    require(outcome.cascade_set.size() == 1, "only the mistake cancels");
    auto view = engine.get_asset(grapes_key("g1"));
    require(view && view->body["owner"] == "grower-coop",
            "g1 should return to the grower");
    return "g1 owner restored to grower-coop";
  });

  step(report, "A1: the corrected sale goes through", [&] {
    engine.issue_transaction(grower, "sellGrapes",
                             {{"batch_id", "g1"}, {"to", "vintner"}});
    auto view = engine.get_asset(grapes_key("g1"));
    require(view && view->body["owner"] == "vintner",
            "g1 should belong to vintner");
    return "g1 sold to vintner";
  });

  // A2: tricked user. An org admin reverts the damage.
  TxId tricked;
  step(report, "A2: tricked user sells g2 to the attacker org", [&] {
    auto receipt = engine.issue_transaction(
        grower, "sellGrapes", {{"batch_id", "g2"}, {"to", "merchant"}});
    tricked = receipt.tx_id;
    return "pending sale " + tricked.hex;
  });

  step(report, "A2: org admin cancels, view restored", [&] {
    auto outcome = engine.cancel_transaction(grower_admin, tricked);
    require(outcome.cascade_set.size() == 1, "only the tricked sale cancels");
    auto view = engine.get_asset(grapes_key("g2"));
    require(view && view->body["owner"] == "grower-coop",
            "g2 should return to the grower");
    return "g2 owner restored to grower-coop";
  });

  // A3: stolen credentials. The attacker chains transactions; the admin
  // cancels the root and the cascade removes all of them.
  TxId attack_root;
  step(report, "A3: attacker chains transform and sale on g3", [&] {
    auto receipt = engine.issue_transaction(
        producer, "transformGrapes",
        {{"batch_id", "g3"}, {"bulk_id", "sx1"}});
    attack_root = receipt.tx_id;
    engine.issue_transaction(producer, "sellBulk",
                             {{"bulk_id", "sx1"}, {"to", "merchant"}});
    auto view = engine.get_asset(bulk_key("sx1"));
    require(view && view->body["owner"] == "merchant",
            "attacker chain should be visible while pending");
    return "attack chain rooted at " + attack_root.hex;
  });

  step(report, "A3: admin cancels the root, cascade removes the chain", [&] {
    auto outcome = engine.cancel_transaction(producer_admin, attack_root);
    require(outcome.cascade_set.size() == 2,
            "transform and dependent sale cancel together");
    auto grapes = engine.get_asset(grapes_key("g3"));
    require(grapes && grapes->body["quantity"] == 60 &&
                grapes->body["owner"] == "vintner",
            "g3 should be restored to its pre-attack state");
    auto bulk = engine.get_asset(bulk_key("sx1"));
    require(!bulk.has_value(), "bulk sx1 should be gone");
    return "canceled " + std::to_string(outcome.cascade_set.size()) +
           " transactions; pre-attack views restored";
  });

  // A4: contract misuse found too late. Consolidated transactions stay.
  TxId late_root;
  step(report, "A4: misuse consolidates before detection", [&] {
    auto receipt = engine.issue_transaction(
        producer, "transformGrapes",
        {{"batch_id", "g4"}, {"bulk_id", "sx2"}});
    late_root = receipt.tx_id;
    engine.advance_by(delay + 1);
    auto view = engine.get_asset(bulk_key("sx2"));
    require(view.has_value(), "bulk sx2 should be visible");
    auto history = engine.get_transactions(bulk_key("sx2"));
    require(!history.empty() &&
                history.back().validity == Validity::Consolidated,
            "misuse transaction should have consolidated");
    return "misuse " + late_root.hex + " consolidated";
  });

  expect_error(report,
               "A4: cancel is rejected, the residual risk is explicit",
               ErrorCode::AlreadyConsolidated,
               [&] { engine.cancel_transaction(producer_admin, late_root); });

  step(report, "hash chain verifies", [&] {
    auto check = engine.store().verify_chain();
    require(check.ok, check.detail);
    return std::to_string(engine.store().height() + 1) + " blocks verified";
  });

  return report;
}

}  // namespace evochain::app
