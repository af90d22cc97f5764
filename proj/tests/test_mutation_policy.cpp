#include <doctest.h>

#include "evochain/canonical.hpp"
#include "evochain/mutation_policy.hpp"

using namespace evochain;

namespace {

MutableTransaction pending_tx(Timestamp sub, Duration delay,
                              const std::string& op = "setA",
                              const std::string& issuer = "alice") {
  MutableTransaction mt;
  mt.submission_time = sub;
  mt.validity = Validity::Pending;
  mt.delay = delay;
  mt.issuer = Principal{issuer, "org1", Role::User};
  mt.op_name = op;
  mt.writes = {{"k1", json{{"slot", "k1"}}}};
  mt.id = canonical::mt_id(mt);
  return mt;
}

}  // namespace

TEST_CASE("expiration is inclusive at the expiry instant") {
  auto tx = pending_tx(10, 5);
  CHECK(!is_expired(tx, 14));
  CHECK(is_expired(tx, 15));  // submission + delay, the boundary itself
  CHECK(is_expired(tx, 16));
}

TEST_CASE("binding values come from the first written object with the field") {
  MutableTransaction tx;
  tx.writes = {{"a", json{{"other", 1}}},
               {"b", json{{"slot", "k7"}}},
               {"c", json{{"slot", "k9"}}}};
  auto bound = binding_value(tx, "slot");
  REQUIRE(bound.has_value());
  CHECK(*bound == json("k7"));  // "a" lacks the field, "b" wins over "c"
  CHECK(!binding_value(tx, "missing").has_value());

  SUBCASE("non-object payloads are skipped") {
    tx.writes = {{"a", json("plain string")}, {"b", json{{"slot", 3}}}};
    auto v = binding_value(tx, "slot");
    REQUIRE(v.has_value());
    CHECK(*v == json(3));
  }
}

TEST_CASE("condition satisfaction requires op match and equal bindings") {
  ConditionSpec spec{"confirm", "ref", "slot"};
  auto pending = pending_tx(1, 0, "setCond");

  MutableTransaction trigger;
  trigger.submission_time = 5;
  trigger.op_name = "confirm";
  trigger.writes = {{"x", json{{"ref", "k1"}}}};

  CHECK(condition_satisfied(pending, trigger, spec));

  SUBCASE("a different op never triggers") {
    trigger.op_name = "other";
    CHECK(!condition_satisfied(pending, trigger, spec));
  }
  SUBCASE("unequal bindings never trigger") {
    trigger.writes = {{"x", json{{"ref", "k2"}}}};
    CHECK(!condition_satisfied(pending, trigger, spec));
  }
  SUBCASE("missing fields never trigger") {
    trigger.writes = {{"x", json{{"nope", "k1"}}}};
    CHECK(!condition_satisfied(pending, trigger, spec));
    auto bare = pending;
    bare.writes = {{"k1", json{{"other", 1}}}};
    CHECK(!condition_satisfied(bare, trigger, spec));
  }
}

TEST_CASE("cancel authorization: exhaustive rule matrix") {
  // Every combination of principal role, org match, issuer name match and
  // the two rule flags. Expected result spelled out from the rule
  // semantics: observers never cancel; admins cancel same-org transactions
  // when admin_any; the exact issuing principal cancels its own when
  // self_cancel. A name shared across orgs or roles is a different
  // principal and earns nothing.
  const auto target = pending_tx(1, 5);  // issued by alice@org1 (user)
  int combinations = 0;
  for (Role role : {Role::Admin, Role::User, Role::Observer}) {
    for (bool same_org : {true, false}) {
      for (bool same_name : {true, false}) {
        for (bool admin_any : {true, false}) {
          for (bool self_cancel : {true, false}) {
            Principal p;
            p.name = same_name ? "alice" : "mallory";
            p.org = same_org ? "org1" : "org2";
            p.role = role;
            CancelRule rule{admin_any, self_cancel};

            const bool is_issuer = p == target.issuer;
            const bool expected =
                role != Role::Observer &&
                ((admin_any && role == Role::Admin && same_org) ||
                 (self_cancel && is_issuer));
            CAPTURE(static_cast<int>(role));
            CAPTURE(same_org);
            CAPTURE(is_issuer);
            CAPTURE(admin_any);
            CAPTURE(self_cancel);
            CHECK(authorize_cancel(p, target, rule) == expected);
            ++combinations;
          }
        }
      }
    }
  }
  CHECK(combinations == 48);
}

TEST_CASE("raise_delay guards every side of the bargain") {
  const auto policy_lookup = [](const std::string& op) -> const MutationPolicy& {
    static MutationPolicy expiration = [] {
      MutationPolicy p;
      p.kind = PolicyKind::Expiration;
      p.delay = 10;
      return p;
    }();
    static MutationPolicy condition = [] {
      MutationPolicy p;
      p.kind = PolicyKind::Condition;
      p.condition = ConditionSpec{"confirm", "ref", "slot"};
      return p;
    }();
    return op == "setCond" ? condition : expiration;
  };
  const Principal admin{"root", "org1", Role::Admin};
  const Principal user{"alice", "org1", Role::User};
  auto tx = pending_tx(100, 10);  // expires at 110

  SUBCASE("only admins raise delays") {
    CHECK_THROWS_AS(
        (void)raise_delay(user, tx, 20, {}, {}, policy_lookup), Error);
    auto updated = raise_delay(admin, tx, 20, {}, {}, policy_lookup);
    CHECK(updated.delay == 20);
    CHECK(tx.delay == 10);  // input untouched
  }

  SUBCASE("only pending transactions change") {
    auto consolidated = validity_transition(tx, Validity::Consolidated, 120);
    CHECK_THROWS_AS(
        (void)raise_delay(admin, consolidated, 20, {}, {}, policy_lookup),
        Error);
  }

  SUBCASE("lowering is rejected") {
    CHECK_THROWS_AS((void)raise_delay(admin, tx, 9, {}, {}, policy_lookup),
                    Error);
    CHECK_NOTHROW((void)raise_delay(admin, tx, 10, {}, {}, policy_lookup));
  }

  SUBCASE("a pending dependency must expire first") {
    auto dep = pending_tx(95, 20, "setA", "bob");  // expires at 115
    // New expiry 100 + 20 = 120 >= 115: fine.
    CHECK_NOTHROW((void)raise_delay(admin, tx, 20, {&dep, 1}, {},
                                    policy_lookup));
    // The dependency outliving the raised transaction is impossible here,
    // but a *larger* dependency expiry must reject: dep expires at 135.
    auto slow_dep = pending_tx(95, 40, "setA", "bob");
    CHECK_THROWS_AS(
        (void)raise_delay(admin, tx, 20, {&slow_dep, 1}, {}, policy_lookup),
        Error);
  }

  SUBCASE("a pending dependent must expire later") {
    auto dependent = pending_tx(105, 30, "setA", "bob");  // expires at 135
    CHECK_NOTHROW((void)raise_delay(admin, tx, 20, {}, {&dependent, 1},
                                    policy_lookup));
    auto fast_dependent = pending_tx(105, 10, "setA", "bob");  // expires 115
    CHECK_THROWS_AS((void)raise_delay(admin, tx, 20, {},
                                      {&fast_dependent, 1}, policy_lookup),
                    Error);
  }

  SUBCASE("terminal and condition-policy neighbors are ignored") {
    auto canceled_dep = validity_transition(
        pending_tx(95, 40, "setA", "bob"), Validity::Canceled, 99);
    CHECK_NOTHROW((void)raise_delay(admin, tx, 20, {&canceled_dep, 1}, {},
                                    policy_lookup));
    auto cond_dep = pending_tx(95, 0, "setCond", "bob");
    CHECK_NOTHROW((void)raise_delay(admin, tx, 20, {&cond_dep, 1}, {},
                                    policy_lookup));
  }
}
