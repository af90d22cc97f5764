#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "evochain/bench.hpp"
#include "evochain/canonical.hpp"
#include "evochain/scenarios.hpp"
#include "evochain/view_engine.hpp"
#include "evochain/winetracker.hpp"

namespace evochain {

namespace {

namespace fs = std::filesystem;

AppConfig load_config_for(const fs::path& ledger_dir,
                          const std::string& config_path) {
  if (!config_path.empty()) return AppConfig::load_file(config_path);
  const auto candidate = ledger_dir / "config.json";
  if (fs::exists(candidate)) return AppConfig::load_file(candidate.string());
  return app::default_winetracker_config();
}

// Either a configured principal's name or an inline "name:org:role" triple.
Principal resolve_principal(const AppConfig& config, const std::string& spec) {
  const auto first = spec.find(':');
  if (first == std::string::npos) {
    auto p = config.find_principal(spec);
    if (!p) {
      throw Error(ErrorCode::ValidationFailed,
                  "unknown principal '" + spec + "'");
    }
    return *p;
  }
  const auto second = spec.find(':', first + 1);
  if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos) {
    throw Error(ErrorCode::ValidationFailed,
                "principal spec must be a name or name:org:role");
  }
  Principal p;
  p.name = spec.substr(0, first);
  p.org = spec.substr(first + 1, second - first - 1);
  p.role = role_from_string(spec.substr(second + 1));
  if (p.name.empty() || p.org.empty()) {
    throw Error(ErrorCode::ValidationFailed,
                "principal spec must be a name or name:org:role");
  }
  return p;
}

struct Host {
  std::unique_ptr<AppHost> app;
  AppConfig config;
};

Host open_host(const std::string& ledger_dir, const std::string& config_path,
               const std::string& variant) {
  Host host;
  host.config = load_config_for(ledger_dir, config_path);
  auto store = LedgerStore::open(ledger_dir);
  auto registry = app::default_registry();
  if (bench::variant_from_string(variant) == bench::Variant::Vanilla) {
    host.app = std::make_unique<VanillaEngine>(
        std::move(store), host.config, std::move(registry));
  } else {
    host.app = std::make_unique<EvoEngine>(std::move(store), host.config,
                                           std::move(registry));
  }
  return host;
}

json principal_brief(const Principal& p) {
  return {{"name", p.name}, {"org", p.org}, {"role", to_string(p.role)}};
}

void emit(const json& payload) { std::cout << payload.dump(2) << "\n"; }

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App cli{"evochain: a permissioned ledger with controlled mutability"};
  cli.require_subcommand(1);

  std::string ledger_dir;
  std::string config_path;
  std::string variant = "evochain";
  std::string format = "json";
  std::string out_path;
  std::string as_spec;
  std::string op_name;
  std::string args_text = "{}";
  std::string tx_hex;
  std::string key;
  std::string bench_case;
  std::string scenario_name;
  std::int64_t now_override = -1;
  std::uint64_t seed = 42;
  int scale = 100;
  int workers = 10;

  auto add_ledger = [&](CLI::App* cmd) {
    cmd->add_option("--ledger", ledger_dir, "ledger directory")->required();
    cmd->add_option("--config", config_path, "config file path");
    cmd->add_option("--variant", variant, "vanilla or evochain");
    cmd->add_option("--now", now_override,
                    "advance the logical clock before running");
  };

  auto* cmd_init = cli.add_subcommand("init", "create a ledger directory");
  cmd_init->add_option("--ledger", ledger_dir)->required();
  cmd_init->add_option("--config", config_path,
                       "config to install; defaults generate one");

  auto* cmd_issue = cli.add_subcommand("issue", "issue a transaction");
  add_ledger(cmd_issue);
  cmd_issue->add_option("--as", as_spec, "principal name or name:org:role")
      ->required();
  cmd_issue->add_option("--op", op_name, "operation name")->required();
  cmd_issue->add_option("--args", args_text, "operation args as json");

  auto* cmd_cancel = cli.add_subcommand("cancel", "cancel a transaction");
  add_ledger(cmd_cancel);
  cmd_cancel->add_option("--as", as_spec)->required();
  cmd_cancel->add_option("--tx", tx_hex, "target transaction id")->required();

  auto* cmd_get = cli.add_subcommand("get-asset", "view one object");
  add_ledger(cmd_get);
  cmd_get->add_option("--key", key)->required();

  auto* cmd_txs =
      cli.add_subcommand("get-transactions", "history of one object");
  add_ledger(cmd_txs);
  cmd_txs->add_option("--key", key)->required();

  auto* cmd_verify =
      cli.add_subcommand("verify", "check the hash chain and replay");
  cmd_verify->add_option("--ledger", ledger_dir)->required();

  auto* cmd_bench = cli.add_subcommand("bench", "run a benchmark scenario");
  cmd_bench->add_option("case", bench_case, "tc1, tc2 or tc3")->required();
  cmd_bench->add_option("--variant", variant);
  cmd_bench->add_option("--seed", seed);
  cmd_bench->add_option("--scale", scale, "divides workload size");
  cmd_bench->add_option("--workers", workers);
  cmd_bench->add_option("--format", format, "csv or json");
  cmd_bench->add_option("--out", out_path, "write the report here");

  auto* cmd_scenario =
      cli.add_subcommand("scenario", "run a scripted walkthrough");
  cmd_scenario->add_option("name", scenario_name, "recovery or threats")
      ->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (cmd_init->parsed()) {
      auto store = LedgerStore::create(ledger_dir);
      AppConfig config = config_path.empty()
                             ? app::default_winetracker_config()
                             : AppConfig::load_file(config_path);
      std::ofstream out(fs::path(ledger_dir) / "config.json");
      out << config.to_json().dump(2) << "\n";
      if (!out) {
        throw Error(ErrorCode::IoError, "could not write config.json");
      }
      json principals = json::array();
      for (const auto& p : config.principals) {
        principals.push_back(principal_brief(p));
      }
      emit({{"ledger", ledger_dir},
            {"height", store.height()},
            {"principals", principals}});
      return 0;
    }

    if (cmd_issue->parsed()) {
      auto host = open_host(ledger_dir, config_path, variant);
      if (now_override >= 0) host.app->advance_to(now_override);
      auto principal = resolve_principal(host.config, as_spec);
      auto receipt = host.app->issue_transaction(principal, op_name,
                                                 json::parse(args_text));
      emit({{"tx_id", receipt.tx_id.hex},
            {"block_height", receipt.block_height},
            {"submission_time", receipt.submission_time}});
      return 0;
    }

    if (cmd_cancel->parsed()) {
      auto host = open_host(ledger_dir, config_path, "evochain");
      if (now_override >= 0) host.app->advance_to(now_override);
      auto principal = resolve_principal(host.config, as_spec);
      auto* engine = dynamic_cast<EvoEngine*>(host.app.get());
      auto outcome = engine->cancel_transaction(principal, TxId{tx_hex});
      json cascade = json::array();
      for (const auto& id : outcome.cascade_set) cascade.push_back(id.hex);
      emit({{"ct_id", outcome.receipt.tx_id.hex},
            {"canceled", std::move(cascade)}});
      return 0;
    }

    if (cmd_get->parsed()) {
      auto host = open_host(ledger_dir, config_path, variant);
      if (now_override >= 0) host.app->advance_to(now_override);
      auto view = host.app->get_asset(key);
      if (!view) {
        emit({{"present", false}, {"object_key", key}});
      } else {
        emit({{"present", true},
              {"object_key", view->object_key},
              {"body", view->body},
              {"derived_from", view->derived_from.hex},
              {"as_of", view->as_of}});
      }
      return 0;
    }

    if (cmd_txs->parsed()) {
      auto host = open_host(ledger_dir, config_path, variant);
      if (now_override >= 0) host.app->advance_to(now_override);
      json out = json::array();
      for (const auto& tx : host.app->get_transactions(key)) {
        out.push_back(canonical::record_json(TransactionRecord{tx}));
      }
      emit(out);
      return 0;
    }

    if (cmd_verify->parsed()) {
      auto store = LedgerStore::open(ledger_dir);
      auto check = store.verify_chain();
      // Byte-level replay: the persisted lines must rebuild this state.
      auto replayed =
          LedgerStore::from_bytes(store.ledger_bytes(), store.journal_bytes());
      const bool replay_ok =
          replayed.world_state_json() == store.world_state_json();
      json out = {{"ok", check.ok && replay_ok},
                  {"blocks", store.height() + 1},
                  {"chain_ok", check.ok},
                  {"replay_ok", replay_ok},
                  {"detail", check.detail}};
      if (!check.ok && check.first_bad_height) {
        out["first_bad_height"] = *check.first_bad_height;
      }
      emit(out);
      return (check.ok && replay_ok) ? 0 : 1;
    }

    if (cmd_bench->parsed()) {
      auto scenario = bench::scenario_from_string(bench_case);
      auto config = bench::make_workload(scenario, scale, seed, workers);
      auto report =
          bench::run_workload(config, bench::variant_from_string(variant));
      if (!out_path.empty()) {
        auto written = bench::report_emit(report, format, out_path);
        emit({{"report", written.string()},
              {"functional_digest", report.functional_digest}});
      } else if (format == "csv") {
        std::cout << bench::report_csv(report);
      } else {
        emit(bench::report_json(report));
      }
      return 0;
    }

    if (cmd_scenario->parsed()) {
      app::ScenarioReport report;
      if (scenario_name == "recovery") {
        report = app::run_recovery_walkthrough();
      } else if (scenario_name == "threats") {
        report = app::run_threat_scenarios();
      } else {
        throw Error(ErrorCode::ValidationFailed,
                    "unknown scenario '" + scenario_name + "'");
      }
      emit(report.to_json());
      return report.ok() ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.code()))},
                      {"message", e.what()}}
                     .dump()
              << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "ValidationFailed"}, {"message", e.what()}}
                     .dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace evochain
