// Acceptance gate: seven end-to-end criteria, one PASS/FAIL line each,
// nonzero exit when any line fails. Budgets are asserted, not advisory.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "evochain/bench.hpp"
#include "evochain/mutation_policy.hpp"
#include "evochain/scenarios.hpp"
#include "evochain/view_engine.hpp"
#include "evochain/winetracker.hpp"
#include "support/history_runner.hpp"

using namespace evochain;

namespace {

using Seconds = std::chrono::duration<double>;

struct Criterion {
  std::string id;
  bool pass{false};
  double seconds{0};
  std::optional<double> limit_s;
  std::string detail;
};

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return Seconds(std::chrono::steady_clock::now() - start).count();
}

void print_line(const Criterion& c) {
  std::printf("%s %s (%.2fs%s) %s\n", c.id.c_str(),
              c.pass ? "PASS" : "FAIL", c.seconds,
              c.limit_s ? (", limit " + std::to_string(static_cast<int>(
                               *c.limit_s)) + "s").c_str()
                        : "",
              c.detail.c_str());
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

// Weighted per-task mean latency of a whole run.
double run_mean_latency_ms(const bench::MetricsReport& report, std::size_t lo,
                           std::size_t hi) {
  double weighted = 0;
  long total = 0;
  for (std::size_t i = lo; i < hi && i < report.rounds.size(); ++i) {
    weighted += report.rounds[i].avg_latency_ms * report.rounds[i].submitted;
    total += report.rounds[i].submitted;
  }
  return total > 0 ? weighted / static_cast<double>(total) : 0.0;
}

// ---- criterion 1: scripted recovery walkthrough ---------------------------

Criterion run_c1() {
  Criterion c{"C1", false, 0, 1.0, ""};
  const auto start = std::chrono::steady_clock::now();
  try {
    auto report = app::run_recovery_walkthrough();
    c.seconds = elapsed_since(start);
    std::string first_bad;
    for (const auto& step : report.steps) {
      if (!step.ok && first_bad.empty()) first_bad = step.name;
    }
    c.pass = report.ok() && c.seconds < *c.limit_s;
    c.detail = report.ok()
                   ? "recovery walkthrough: " +
                         std::to_string(report.steps.size()) +
                         " steps (create, query, cancel, empty, re-create)"
                   : "step failed: " + first_bad;
    if (report.ok() && !c.pass) c.detail += " [over time budget]";
  } catch (const std::exception& e) {
    c.seconds = elapsed_since(start);
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

// ---- criteria 2 and 3: seeded random histories ----------------------------

struct HistorySweep {
  bool ok{true};
  bool view_failure{false};
  std::string detail;
  double seconds{0};
  int histories{0};
  testing::HistoryStats stats;
};

HistorySweep run_history_sweep(int count) {
  HistorySweep sweep;
  const auto start = std::chrono::steady_clock::now();
  for (int seed = 1; seed <= count; ++seed) {
    try {
      testing::run_random_history(static_cast<std::uint64_t>(seed),
                                  sweep.stats);
      ++sweep.histories;
    } catch (const std::exception& e) {
      sweep.ok = false;
      sweep.detail = e.what();
      sweep.view_failure =
          sweep.detail.find("view") != std::string::npos ||
          sweep.detail.find("oracle") != std::string::npos;
      break;
    }
  }
  sweep.seconds = elapsed_since(start);
  return sweep;
}

Criterion run_c2(const HistorySweep& sweep, int target) {
  Criterion c{"C2", false, sweep.seconds, 60.0, ""};
  if (!sweep.ok) {
    c.detail = sweep.view_failure
                   ? "view diverged from the replay oracle: " + sweep.detail
                   : "run aborted before full coverage: " + sweep.detail;
    return c;
  }
  c.pass = sweep.seconds < *c.limit_s;
  c.detail = std::to_string(sweep.histories) + "/" + std::to_string(target) +
             " histories, every view byte-equal to the replay oracle (" +
             std::to_string(sweep.stats.queries) + " queries, " +
             std::to_string(sweep.stats.views_present) + " present)";
  if (!c.pass) c.detail += " [over time budget]";
  return c;
}

Criterion run_c3(const HistorySweep& sweep) {
  Criterion c{"C3", false, sweep.seconds, std::nullopt, ""};
  if (!sweep.ok) {
    c.detail = "invariant sweep aborted: " + sweep.detail;
    return c;
  }
  c.pass = true;
  c.detail =
      "terminal validity, dependency implication, chain verification and "
      "byte replay held at every step (" +
      std::to_string(sweep.stats.issues_ok) + " issues, " +
      std::to_string(sweep.stats.cancels_ok) + " cancels, " +
      std::to_string(sweep.stats.consolidations) + " consolidations)";
  return c;
}

// ---- criterion 4: exact cascade semantics ----------------------------------

Criterion run_c4() {
  Criterion c{"C4", false, 0, std::nullopt, ""};
  const auto start = std::chrono::steady_clock::now();
  const Principal grower{"grower-coop-user", "grower-coop", Role::User};
  const Principal vintner{"vintner-user", "vintner", Role::User};
  const Principal admin{"grower-coop-admin", "grower-coop", Role::Admin};

  auto build_chain = [&](EvoEngine& engine) {
    std::vector<CommitReceipt> r;
    r.push_back(engine.issue_transaction(
        grower, "createGrapes", json{{"batch_id", "c4"}, {"quantity", 100}}));
    r.push_back(engine.issue_transaction(
        grower, "sellGrapes", json{{"batch_id", "c4"}, {"to", "vintner"}}));
    r.push_back(engine.issue_transaction(
        vintner, "transformGrapes",
        json{{"batch_id", "c4"}, {"bulk_id", "c4w"}}));
    return r;
  };

  try {
    EvoEngine engine(LedgerStore{}, app::default_winetracker_config(1000000),
                     app::default_registry());
    auto chain = build_chain(engine);
    auto outcome = engine.cancel_transaction(admin, chain[0].tx_id);
    const std::vector<TxId> expected{chain[0].tx_id, chain[1].tx_id,
                                     chain[2].tx_id};
    if (outcome.cascade_set != expected) {
      c.detail = "cascade was not exactly {create, sell, transform}";
      c.seconds = elapsed_since(start);
      return c;
    }

    EvoEngine blocked(LedgerStore{}, app::default_winetracker_config(1000000),
                      app::default_registry());
    auto chain2 = build_chain(blocked);
    blocked.store().update_validity(chain2[2].tx_id, Validity::Consolidated,
                                    blocked.now());
    bool rejected = false;
    try {
      blocked.cancel_transaction(admin, chain2[0].tx_id);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::AlreadyConsolidated &&
                 e.subject() == chain2[2].tx_id.hex;
    }
    if (!rejected) {
      c.detail =
          "a consolidated dependent did not block with AlreadyConsolidated "
          "naming the blocker";
      c.seconds = elapsed_since(start);
      return c;
    }
    for (const auto& receipt : {chain2[0], chain2[1]}) {
      auto rec = std::get<MutableTransaction>(
          blocked.store().get_record(receipt.tx_id));
      if (rec.validity != Validity::Pending) {
        c.detail = "blocked cancel was not atomic: a chain member moved";
        c.seconds = elapsed_since(start);
        return c;
      }
    }
    c.pass = true;
    c.detail =
        "cancel of create cascaded exactly {create, sell, transform}; a "
        "consolidated dependent blocked atomically naming the blocker";
  } catch (const std::exception& e) {
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = elapsed_since(start);
  return c;
}

// ---- criterion 5: zero-delay degeneration ----------------------------------

AppRegistry degeneration_registry() {
  AppRegistry registry;
  OpSpec spec;
  spec.handler = [](const AssetView&, const Principal&,
                    const json& args) -> std::map<std::string, json> {
    std::map<std::string, json> writes;
    for (const auto& [key, body] : args.at("writes").items()) {
      writes[key] = body;
    }
    return writes;
  };
  for (const char* op : {"setA", "setB", "setC"}) registry.add(op, spec);
  return registry;
}

AppConfig degeneration_config() {
  AppConfig config;
  config.default_delay = 0;  // every transaction expires at its own commit
  config.principals = {Principal{"user1", "org1", Role::User},
                       Principal{"user2", "org2", Role::User}};
  return config;
}

// Drives both variants in lockstep; returns a violation string or empty.
std::string degeneration_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int n) { return static_cast<int>(rng() % n); };

  EvoEngine evo(LedgerStore{}, degeneration_config(),
                degeneration_registry());
  VanillaEngine vanilla(LedgerStore{}, degeneration_config(),
                        degeneration_registry());
  const std::vector<Principal> users{Principal{"user1", "org1", Role::User},
                                     Principal{"user2", "org2", Role::User}};
  const std::vector<std::string> ops{"setA", "setB", "setC"};
  auto key_name = [](int i) { return "k" + std::to_string(i); };

  const int steps = 15 + pick(16);
  for (int step = 0; step < steps; ++step) {
    if (pick(100) < 65) {
      const auto& op = ops[static_cast<std::size_t>(pick(3))];
      const auto& user = users[static_cast<std::size_t>(pick(2))];
      const auto key = key_name(pick(6));
      json writes = json::object();
      writes[key] = {{"n", step}, {"op", op}};
      const json args = {{"writes", writes}};
      auto a = evo.issue_transaction(user, op, args);
      auto b = vanilla.issue_transaction(user, op, args);
      if (a.tx_id != b.tx_id) {
        return "seed=" + std::to_string(seed) + " step=" +
               std::to_string(step) + ": variants derived different ids";
      }
    } else {
      const auto key = key_name(pick(6));
      auto a = evo.get_asset(key);
      auto b = vanilla.get_asset(key);
      if (a.has_value() != b.has_value()) {
        return "seed=" + std::to_string(seed) + " step=" +
               std::to_string(step) + ": presence differs for " + key;
      }
      if (a && (a->body.dump() != b->body.dump() ||
                a->derived_from != b->derived_from)) {
        return "seed=" + std::to_string(seed) + " step=" +
               std::to_string(step) + ": views differ for " + key;
      }
    }
  }
  for (int i = 0; i < 6; ++i) {
    const auto key = key_name(i);
    auto a = evo.get_asset(key);
    auto b = vanilla.get_asset(key);
    if (a.has_value() != b.has_value() ||
        (a && a->body.dump() != b->body.dump())) {
      return "seed=" + std::to_string(seed) + ": final state differs for " +
             key;
    }
  }
  return {};
}

Criterion run_c5(int count) {
  Criterion c{"C5", false, 0, std::nullopt, ""};
  const auto start = std::chrono::steady_clock::now();
  try {
    for (int seed = 1; seed <= count; ++seed) {
      auto violation = degeneration_seed(static_cast<std::uint64_t>(seed));
      if (!violation.empty()) {
        c.detail = violation;
        c.seconds = elapsed_since(start);
        return c;
      }
    }
    c.pass = true;
    c.detail = std::to_string(count) +
               " zero-delay workloads: controlled-mutability views, ids and "
               "final states equal the vanilla variant";
  } catch (const std::exception& e) {
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = elapsed_since(start);
  return c;
}

// ---- criterion 6: overhead direction at desk scale -------------------------

Criterion run_c6() {
  Criterion c{"C6", false, 0, 300.0, ""};
  const auto start = std::chrono::steady_clock::now();
  constexpr int kRuns = 5;
  constexpr int kScale = 100;
  try {
    std::vector<double> evo_tc1, vanilla_tc1, tc3_before, tc3_after;
    for (int run = 0; run < kRuns; ++run) {
      auto cfg = bench::make_workload(bench::Scenario::TC1, kScale, 42);
      auto evo = bench::run_workload(cfg, bench::Variant::EvoChain);
      auto van = bench::run_workload(cfg, bench::Variant::Vanilla);
      evo_tc1.push_back(run_mean_latency_ms(evo, 0, evo.rounds.size()));
      vanilla_tc1.push_back(run_mean_latency_ms(van, 0, van.rounds.size()));
    }
    for (int run = 0; run < kRuns; ++run) {
      auto cfg = bench::make_workload(bench::Scenario::TC3, kScale, 42);
      auto report = bench::run_workload(cfg, bench::Variant::EvoChain);
      if (report.rounds.size() != 24) {
        c.detail = "unexpected tc3 shape";
        c.seconds = elapsed_since(start);
        return c;
      }
      tc3_before.push_back(run_mean_latency_ms(report, 16, 20));
      tc3_after.push_back(run_mean_latency_ms(report, 20, 24));
    }
    const double evo_m = median(evo_tc1);
    const double van_m = median(vanilla_tc1);
    const double before_m = median(tc3_before);
    const double after_m = median(tc3_after);
    c.seconds = elapsed_since(start);

    const bool tc1_dir = evo_m >= van_m;
    const bool tc3_dir = after_m >= before_m;
    c.pass = tc1_dir && tc3_dir && c.seconds < *c.limit_s;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "medians over %d runs at scale 1/%d: tc1 %.3fms (engine) vs "
                  "%.3fms (vanilla) %s; tc3 consolidating %.3fms vs "
                  "non-consolidating %.3fms %s",
                  kRuns, kScale, evo_m, van_m, tc1_dir ? ">= ok" : "< FAIL",
                  after_m, before_m, tc3_dir ? ">= ok" : "< FAIL");
    c.detail = buf;
    if (tc1_dir && tc3_dir && !c.pass) c.detail += " [over time budget]";
  } catch (const std::exception& e) {
    c.seconds = elapsed_since(start);
    c.detail = std::string("exception: ") + e.what();
  }
  return c;
}

// ---- criterion 7: policy unit matrix ---------------------------------------

Criterion run_c7() {
  Criterion c{"C7", false, 0, std::nullopt, ""};
  const auto start = std::chrono::steady_clock::now();
  int checks = 0;
  int failures = 0;
  std::string first;
  auto expect = [&](bool cond, const std::string& what) {
    ++checks;
    if (!cond) {
      ++failures;
      if (first.empty()) first = what;
    }
  };
  auto expect_error = [&](ErrorCode code, const std::string& what,
                          const std::function<void()>& fn) {
    ++checks;
    try {
      fn();
      ++failures;
      if (first.empty()) first = what + " (no error)";
    } catch (const Error& e) {
      if (e.code() != code) {
        ++failures;
        if (first.empty()) first = what + " (wrong code)";
      }
    }
  };

  MutableTransaction target;
  target.submission_time = 100;
  target.delay = 10;
  target.validity = Validity::Pending;
  target.issuer = Principal{"alice", "org1", Role::User};
  target.op_name = "setA";
  target.writes = {{"k1", json{{"n", 1}}}};

  // Exhaustive cancel authorization matrix. Self-cancel demands the exact
  // issuing principal; a shared name across orgs or roles earns nothing.
  for (Role role : {Role::Admin, Role::User, Role::Observer}) {
    for (bool same_org : {true, false}) {
      for (bool same_name : {true, false}) {
        for (bool admin_any : {true, false}) {
          for (bool self_cancel : {true, false}) {
            Principal p{same_name ? "alice" : "mallory",
                        same_org ? "org1" : "org2", role};
            const bool expected =
                role != Role::Observer &&
                ((admin_any && role == Role::Admin && same_org) ||
                 (self_cancel && p == target.issuer));
            expect(authorize_cancel(p, target,
                                    CancelRule{admin_any, self_cancel}) ==
                       expected,
                   "cancel authorization combination");
          }
        }
      }
    }
  }

  // Inclusive expiry boundary.
  expect(!is_expired(target, 109), "not expired before the boundary");
  expect(is_expired(target, 110), "expired at the boundary");
  expect(is_expired(target, 111), "expired after the boundary");

  // Condition key binding.
  ConditionSpec spec{"confirm", "ref", "slot"};
  MutableTransaction pending = target;
  pending.op_name = "setCond";
  pending.writes = {{"a", json{{"other", 1}}}, {"b", json{{"slot", "k9"}}}};
  MutableTransaction trigger;
  trigger.submission_time = 200;
  trigger.op_name = "confirm";
  trigger.writes = {{"x", json{{"ref", "k9"}}}};
  expect(condition_satisfied(pending, trigger, spec), "matching trigger");
  auto wrong_op = trigger;
  wrong_op.op_name = "setA";
  expect(!condition_satisfied(pending, wrong_op, spec), "wrong op");
  auto wrong_value = trigger;
  wrong_value.writes = {{"x", json{{"ref", "k8"}}}};
  expect(!condition_satisfied(pending, wrong_value, spec), "wrong binding");
  auto missing = trigger;
  missing.writes = {{"x", json{{"nope", 1}}}};
  expect(!condition_satisfied(pending, missing, spec), "missing field");
  expect(binding_value(pending, "slot").value_or(json()) == json("k9"),
         "binding from first object in key order with the field");

  // raise_delay constraint matrix.
  MutationPolicy expiration;
  expiration.kind = PolicyKind::Expiration;
  expiration.delay = 10;
  MutationPolicy condition;
  condition.kind = PolicyKind::Condition;
  condition.condition = spec;
  auto policy_of = [&](const std::string& op) -> const MutationPolicy& {
    return op == "setCond" ? condition : expiration;
  };
  const Principal admin{"root", "org1", Role::Admin};
  const Principal user{"u", "org1", Role::User};

  expect_error(ErrorCode::NotAdmin, "raise by non-admin", [&] {
    (void)raise_delay(user, target, 20, {}, {}, policy_of);
  });
  auto consolidated = validity_transition(target, Validity::Consolidated, 150);
  expect_error(ErrorCode::IllegalTransition, "raise on consolidated", [&] {
    (void)raise_delay(admin, consolidated, 20, {}, {}, policy_of);
  });
  expect_error(ErrorCode::DependencyViolation, "lowering rejected", [&] {
    (void)raise_delay(admin, target, 9, {}, {}, policy_of);
  });
  try {
    auto same = raise_delay(admin, target, 10, {}, {}, policy_of);
    expect(same.delay == 10, "equal delay accepted");
  } catch (const Error&) {
    expect(false, "equal delay accepted");
  }

  MutableTransaction dep = target;
  dep.submission_time = 95;
  dep.delay = 40;  // expires at 135, after the raised target's 120
  expect_error(ErrorCode::DependencyViolation,
               "pending dependency outliving the raise", [&] {
                 (void)raise_delay(admin, target, 20, {&dep, 1}, {},
                                   policy_of);
               });
  dep.delay = 15;  // expires at 110, inside the new window
  try {
    auto ok = raise_delay(admin, target, 20, {&dep, 1}, {}, policy_of);
    expect(ok.delay == 20, "compatible dependency accepted");
  } catch (const Error&) {
    expect(false, "compatible dependency accepted");
  }

  MutableTransaction dependent = target;
  dependent.submission_time = 105;
  dependent.delay = 10;  // expires at 115, before the raised target's 120
  expect_error(ErrorCode::DependencyViolation,
               "pending dependent expiring inside the raise", [&] {
                 (void)raise_delay(admin, target, 20, {},
                                   {&dependent, 1}, policy_of);
               });
  dependent.delay = 40;  // expires at 145
  try {
    auto ok = raise_delay(admin, target, 20, {}, {&dependent, 1}, policy_of);
    expect(ok.delay == 20, "compatible dependent accepted");
  } catch (const Error&) {
    expect(false, "compatible dependent accepted");
  }

  auto canceled_dep = validity_transition(dep, Validity::Canceled, 140);
  canceled_dep.delay = 400;
  try {
    (void)raise_delay(admin, target, 20, {&canceled_dep, 1}, {}, policy_of);
    expect(true, "terminal dependency ignored");
  } catch (const Error&) {
    expect(false, "terminal dependency ignored");
  }
  MutableTransaction cond_dep = dep;
  cond_dep.op_name = "setCond";
  cond_dep.delay = 400;
  try {
    (void)raise_delay(admin, target, 20, {&cond_dep, 1}, {}, policy_of);
    expect(true, "condition-policy dependency ignored");
  } catch (const Error&) {
    expect(false, "condition-policy dependency ignored");
  }

  c.pass = failures == 0;
  c.detail = c.pass ? std::to_string(checks) +
                          " policy checks hold (48-combination cancel "
                          "matrix, inclusive expiry boundary, condition "
                          "binding, delay-raise constraints)"
                    : std::to_string(failures) + "/" +
                          std::to_string(checks) +
                          " policy checks failed; first: " + first;
  c.seconds = elapsed_since(start);
  return c;
}

}  // namespace

int main() {
  constexpr int kHistories = 10000;
  constexpr int kDegenerationSeeds = 1000;

  std::vector<Criterion> results;
  results.push_back(run_c1());
  print_line(results.back());

  auto sweep = run_history_sweep(kHistories);
  results.push_back(run_c2(sweep, kHistories));
  print_line(results.back());
  results.push_back(run_c3(sweep));
  print_line(results.back());

  results.push_back(run_c4());
  print_line(results.back());
  results.push_back(run_c5(kDegenerationSeeds));
  print_line(results.back());
  results.push_back(run_c6());
  print_line(results.back());
  results.push_back(run_c7());
  print_line(results.back());

  int failed = 0;
  for (const auto& c : results) {
    if (!c.pass) ++failed;
  }
  std::printf("ACCEPTANCE %d/%d PASS\n",
              static_cast<int>(results.size()) - failed,
              static_cast<int>(results.size()));
  return failed == 0 ? 0 : 1;
}
