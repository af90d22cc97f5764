#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evochain/types.hpp"
#include "evochain/view_engine.hpp"

namespace evochain::bench {

enum class Scenario { TC1, TC2, TC3, Custom };
enum class Variant { Vanilla, EvoChain };

std::string_view to_string(Scenario s);
std::string_view to_string(Variant v);
Scenario scenario_from_string(std::string_view s);
Variant variant_from_string(std::string_view s);

enum class TaskKind { Issue, Cancel, Query };

struct TaskSpec {
  TaskKind kind{TaskKind::Issue};
  std::string op;       // issue op name, or query label
  json args;            // issue args
  std::string issuer;   // principal name from the run config
  std::string query_key;
  // Cancel target: the transaction committed by tasks[cancel_index] of
  // rounds[cancel_round].
  int cancel_round{-1};
  int cancel_index{-1};
};

struct Round {
  std::string label;
  double send_rate{400.0};  // open-loop target, tx/s
  std::vector<TaskSpec> tasks;
  Duration advance_after{0};     // logical clock jump once the round ends
  int expected_cascade{-1};      // exact cascade size for cancel tasks
  bool expect_all_ok{true};
};

// Deterministic run plan. Rounds execute in order with a barrier between
// them; tasks inside a round are open-loop paced and functionally
// independent of each other, so worker interleaving cannot change outcomes.
struct WorkloadConfig {
  Scenario scenario{Scenario::Custom};
  int workers{10};
  int tx_per_round{100};
  std::uint64_t seed{42};
  int scale{100};
  Duration op_delay{3000000};
  bool file_backed{true};
  std::vector<Round> rounds;
  std::vector<std::string> digest_keys;  // views folded into the digest
};

// tx_per_round = 10000 / scale (TC1/TC2); TC3 sizes its four query groups
// at 5000 / scale chains each. Send rates ramp 400 -> 1200 tx/s like the
// reference setup; scale divides counts, never rates.
WorkloadConfig make_workload(Scenario scenario, int scale, std::uint64_t seed,
                             int workers = 10);

struct TaskResult {
  bool ok{false};
  ErrorCode code{ErrorCode::ValidationFailed};  // meaningful when !ok
  int cascade{-1};
  TxId tx_id;
  bool view_present{false};
  double scheduled_s{0};  // open-loop send slot
  double started_s{0};    // actual request start, after pacing sleep
  double finished_s{0};
};

struct RoundMetrics {
  int round{0};
  std::string op;
  int submitted{0};
  int accepted{0};
  int rejected{0};
  double send_rate_requested{0};
  double send_rate_achieved{0};
  // Mean request service time (start to finish). Pacing-sleep wakeup error
  // is a harness artifact and stays out of the latency column.
  double avg_latency_ms{0};
  double throughput_tps{0};
  double mem_mb{0};
};

inline constexpr std::string_view kReportSchema = "evochain-bench-report/1";

struct MetricsReport {
  std::string scenario;
  std::string variant;
  std::uint64_t seed{0};
  int scale{0};
  int workers{0};
  // Digest over per-task outcomes (plan order) and final view bodies;
  // identical across runs with equal (seed, scale, variant).
  std::string functional_digest;
  std::vector<RoundMetrics> rounds;
};

// Runs the plan on a fresh ledger. Functional divergence from the plan's
// expectations aborts with ScenarioAssertionFailed naming the first
// divergent task.
MetricsReport run_workload(const WorkloadConfig& config, Variant variant);

std::string report_csv(const MetricsReport& report);
json report_json(const MetricsReport& report);

// Writes the report; format is "csv" or "json". Returns the path written.
std::filesystem::path report_emit(const MetricsReport& report,
                                  const std::string& format,
                                  const std::filesystem::path& out_path);

double peak_rss_mb();

}  // namespace evochain::bench

namespace evochain {
// Command line entry point (subcommands init, issue, cancel, get-asset,
// get-transactions, verify, bench, scenario). Returns the process exit
// code: 0 success, 1 domain error, 2 usage error.
int cli_main(int argc, char** argv);
}  // namespace evochain
