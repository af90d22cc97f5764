#include "evochain/bench.hpp"

#include <sys/resource.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "evochain/hash.hpp"
#include "evochain/winetracker.hpp"

namespace evochain::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point from, Clock::time_point to) {
  return std::chrono::duration<double>(to - from).count();
}

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 10000; ++attempt) {
      auto candidate =
          base / ("evochain-bench-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter.fetch_add(1)));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = std::move(candidate);
        return;
      }
    }
    throw Error(ErrorCode::IoError, "could not create a temp directory");
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

double ramp_rate(int index, int total) {
  if (total <= 1) return 400.0;
  return 400.0 + (1200.0 - 400.0) * index / (total - 1);
}

TaskSpec issue_task(std::string op, std::string issuer, json args) {
  TaskSpec t;
  t.kind = TaskKind::Issue;
  t.op = std::move(op);
  t.issuer = std::move(issuer);
  t.args = std::move(args);
  return t;
}

TaskSpec query_task(std::string label, std::string key) {
  TaskSpec t;
  t.kind = TaskKind::Query;
  t.op = std::move(label);
  t.query_key = std::move(key);
  return t;
}

void build_tc1(WorkloadConfig& cfg) {
  const int n = std::max(1, 10000 / cfg.scale);
  auto batch = [](int i) { return "t1-b" + std::to_string(i); };
  auto bulk = [](int i) { return "t1-w" + std::to_string(i); };

  Round create{"createGrapes", ramp_rate(0, 4), {}, 0, -1, true};
  Round sell{"sellGrapes", ramp_rate(1, 4), {}, 0, -1, true};
  Round transform{"transformGrapes", ramp_rate(2, 4), {}, 0, -1, true};
  Round sell_bulk{"sellBulk", ramp_rate(3, 4), {}, 0, -1, true};
  for (int i = 0; i < n; ++i) {
    create.tasks.push_back(
        issue_task("createGrapes", "grower-coop-user",
                   {{"batch_id", batch(i)}, {"quantity", 100}}));
    sell.tasks.push_back(issue_task(
        "sellGrapes", "grower-coop-user",
        {{"batch_id", batch(i)}, {"to", "vintner"}}));
    transform.tasks.push_back(
        issue_task("transformGrapes", "vintner-user",
                   {{"batch_id", batch(i)}, {"bulk_id", bulk(i)}}));
    sell_bulk.tasks.push_back(issue_task(
        "sellBulk", "vintner-user", {{"bulk_id", bulk(i)}, {"to", "bottler"}}));
    cfg.digest_keys.push_back(app::grapes_key(batch(i)));
    cfg.digest_keys.push_back(app::bulk_key(bulk(i)));
  }
  cfg.rounds = {std::move(create), std::move(sell), std::move(transform),
                std::move(sell_bulk)};
}

void build_tc2(WorkloadConfig& cfg) {
  const int n = std::max(1, 10000 / cfg.scale);
  for (int g = 0; g < 5; ++g) {
    const int create_round = static_cast<int>(cfg.rounds.size());
    auto batch = [g](int i) {
      return "t2-g" + std::to_string(g) + "-b" + std::to_string(i);
    };
    auto bulk = [g](int i) {
      return "t2-g" + std::to_string(g) + "-w" + std::to_string(i);
    };
    const std::string prefix = "g" + std::to_string(g) + "-";

    Round create{prefix + "create", ramp_rate(0, 4), {}, 0, -1, true};
    Round sell{prefix + "sell", ramp_rate(1, 4), {}, 0, -1, true};
    Round transform{prefix + "transform", ramp_rate(2, 4), {}, 0, -1, true};
    Round cancel{prefix + "cancel", ramp_rate(3, 4), {}, 0, 3, true};
    for (int i = 0; i < n; ++i) {
      create.tasks.push_back(
          issue_task("createGrapes", "grower-coop-user",
                     {{"batch_id", batch(i)}, {"quantity", 100}}));
      sell.tasks.push_back(issue_task(
          "sellGrapes", "grower-coop-user",
          {{"batch_id", batch(i)}, {"to", "vintner"}}));
      transform.tasks.push_back(
          issue_task("transformGrapes", "vintner-user",
                     {{"batch_id", batch(i)}, {"bulk_id", bulk(i)}}));
      TaskSpec c;
      c.kind = TaskKind::Cancel;
      c.op = "cancel";
      c.issuer = "grower-coop-admin";
      c.cancel_round = create_round;
      c.cancel_index = i;
      cancel.tasks.push_back(std::move(c));
      cfg.digest_keys.push_back(app::grapes_key(batch(i)));
      cfg.digest_keys.push_back(app::bulk_key(bulk(i)));
    }
    cfg.rounds.push_back(std::move(create));
    cfg.rounds.push_back(std::move(sell));
    cfg.rounds.push_back(std::move(transform));
    cfg.rounds.push_back(std::move(cancel));
  }
}

void build_tc3(WorkloadConfig& cfg) {
  const int n = std::max(1, 5000 / cfg.scale);
  // Issue rounds consume 16n logical ticks; the delay must outlast all of
  // them so the before-expiry queries really consolidate nothing.
  cfg.op_delay = 16 * static_cast<Duration>(n) + 10000;
  const std::array<std::string, 4> groups{"A", "B", "C", "D"};
  auto batch = [](const std::string& g, int i) {
    return "t3-" + g + "-b" + std::to_string(i);
  };
  auto bulk = [](const std::string& g, int i) {
    return "t3-" + g + "-w" + std::to_string(i);
  };

  // Four disjoint chain groups so each query group touches fresh chains.
  int issue_round = 0;
  const int issue_rounds = 16;
  for (const auto& op :
       {std::string("createGrapes"), std::string("sellGrapes"),
        std::string("transformGrapes"), std::string("sellBulk")}) {
    for (const auto& g : groups) {
      Round round{g + "-" + op, ramp_rate(issue_round++, issue_rounds),
                  {},
                  0,
                  -1,
                  true};
      for (int i = 0; i < n; ++i) {
        if (op == "createGrapes") {
          round.tasks.push_back(
              issue_task(op, "grower-coop-user",
                         {{"batch_id", batch(g, i)}, {"quantity", 100}}));
        } else if (op == "sellGrapes") {
          round.tasks.push_back(issue_task(
              op, "grower-coop-user",
              {{"batch_id", batch(g, i)}, {"to", "vintner"}}));
        } else if (op == "transformGrapes") {
          round.tasks.push_back(
              issue_task(op, "vintner-user",
                         {{"batch_id", batch(g, i)}, {"bulk_id", bulk(g, i)}}));
        } else {
          round.tasks.push_back(issue_task(
              op, "vintner-user", {{"bulk_id", bulk(g, i)}, {"to", "bottler"}}));
        }
      }
      cfg.rounds.push_back(std::move(round));
    }
  }

  // Query phases: identical key sets, before expiry (no consolidation
  // happens) and after it (the first consolidating touch of every chain).
  const std::array<std::pair<std::string, std::string>, 4> query_ops{
      {{"getCreate", "A"},
       {"getSell", "B"},
       {"getTransform", "C"},
       {"getSellBulk", "D"}}};
  for (const char* phase : {"before", "after"}) {
    for (const auto& [op, g] : query_ops) {
      Round round{std::string("q-") + phase + "-" + op, 1000.0, {}, 0, -1,
                  true};
      const bool grapes_group = (g == "A" || g == "B");
      for (int i = 0; i < n; ++i) {
        auto key = grapes_group ? app::grapes_key(batch(g, i))
                                : app::bulk_key(bulk(g, i));
        round.tasks.push_back(query_task(op, std::move(key)));
      }
      cfg.rounds.push_back(std::move(round));
    }
    if (std::string(phase) == "before") {
      // Jump past every chain's expiry between the two phases.
      cfg.rounds.back().advance_after = 2 * cfg.op_delay;
    }
  }
  for (const auto& g : groups) {
    const bool grapes_group = (g == "A" || g == "B");
    for (int i = 0; i < n; ++i) {
      cfg.digest_keys.push_back(grapes_group ? app::grapes_key(batch(g, i))
                                             : app::bulk_key(bulk(g, i)));
    }
  }
}

// Shuffles task order inside every round, then remaps cancel references to
// the new positions. Order is the only thing that moves; rounds and their
// barriers stay fixed.
void shuffle_tasks(WorkloadConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<int>> new_pos(cfg.rounds.size());
  for (std::size_t r = 0; r < cfg.rounds.size(); ++r) {
    auto& tasks = cfg.rounds[r].tasks;
    std::vector<int> perm(tasks.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<TaskSpec> reordered;
    reordered.reserve(tasks.size());
    new_pos[r].resize(tasks.size());
    for (std::size_t ni = 0; ni < perm.size(); ++ni) {
      new_pos[r][perm[ni]] = static_cast<int>(ni);
      reordered.push_back(std::move(tasks[perm[ni]]));
    }
    tasks = std::move(reordered);
  }
  for (auto& round : cfg.rounds) {
    for (auto& task : round.tasks) {
      if (task.cancel_round >= 0) {
        task.cancel_index = new_pos[task.cancel_round][task.cancel_index];
      }
    }
  }
}

std::string round_op(const Round& round) {
  return round.tasks.empty() ? std::string{} : round.tasks.front().op;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::TC1:
      return "tc1";
    case Scenario::TC2:
      return "tc2";
    case Scenario::TC3:
      return "tc3";
    case Scenario::Custom:
      return "custom";
  }
  return "custom";
}

std::string_view to_string(Variant v) {
  return v == Variant::Vanilla ? "vanilla" : "evochain";
}

Scenario scenario_from_string(std::string_view s) {
  if (s == "tc1") return Scenario::TC1;
  if (s == "tc2") return Scenario::TC2;
  if (s == "tc3") return Scenario::TC3;
  if (s == "custom") return Scenario::Custom;
  throw Error(ErrorCode::ValidationFailed,
              "unknown scenario '" + std::string(s) + "'");
}

Variant variant_from_string(std::string_view s) {
  if (s == "vanilla") return Variant::Vanilla;
  if (s == "evochain") return Variant::EvoChain;
  throw Error(ErrorCode::ValidationFailed,
              "unknown variant '" + std::string(s) + "'");
}

WorkloadConfig make_workload(Scenario scenario, int scale, std::uint64_t seed,
                             int workers) {
  if (scale < 1) {
    throw Error(ErrorCode::ValidationFailed, "scale must be at least 1");
  }
  if (workers < 1) {
    throw Error(ErrorCode::ValidationFailed, "workers must be at least 1");
  }
  WorkloadConfig cfg;
  cfg.scenario = scenario;
  cfg.workers = workers;
  cfg.seed = seed;
  cfg.scale = scale;
  switch (scenario) {
    case Scenario::TC1:
      build_tc1(cfg);
      break;
    case Scenario::TC2:
      build_tc2(cfg);
      break;
    case Scenario::TC3:
      build_tc3(cfg);
      break;
    case Scenario::Custom:
      throw Error(ErrorCode::ValidationFailed,
                  "custom workloads are built programmatically");
  }
  cfg.tx_per_round =
      cfg.rounds.empty() ? 0 : static_cast<int>(cfg.rounds.front().tasks.size());
  shuffle_tasks(cfg);
  return cfg;
}

MetricsReport run_workload(const WorkloadConfig& config, Variant variant) {
  const bool has_cancels = std::any_of(
      config.rounds.begin(), config.rounds.end(), [](const Round& r) {
        return std::any_of(r.tasks.begin(), r.tasks.end(), [](const TaskSpec& t) {
          return t.kind == TaskKind::Cancel;
        });
      });
  if (has_cancels && variant == Variant::Vanilla) {
    throw Error(ErrorCode::ValidationFailed,
                "cancel workloads require the evochain variant");
  }

  std::optional<TempDir> tmp;
  LedgerStore store;
  if (config.file_backed) {
    tmp.emplace();
    store = LedgerStore::create(tmp->path);
  }
  auto app_config = app::default_winetracker_config(config.op_delay);
  auto registry = app::default_registry();

  std::unique_ptr<AppHost> host;
  EvoEngine* evo = nullptr;
  if (variant == Variant::EvoChain) {
    auto engine = std::make_unique<EvoEngine>(std::move(store), app_config,
                                              registry);
    evo = engine.get();
    host = std::move(engine);
  } else {
    host = std::make_unique<VanillaEngine>(std::move(store), app_config,
                                           registry);
  }

  std::map<std::string, Principal> principals;
  for (const auto& p : app_config.principals) principals.emplace(p.name, p);
  auto principal = [&](const std::string& name) -> const Principal& {
    auto it = principals.find(name);
    if (it == principals.end()) {
      throw Error(ErrorCode::ValidationFailed,
                  "unknown principal '" + name + "'");
    }
    return it->second;
  };

  MetricsReport report;
  report.scenario = std::string(to_string(config.scenario));
  report.variant = std::string(to_string(variant));
  report.seed = config.seed;
  report.scale = config.scale;
  report.workers = config.workers;

  std::vector<std::vector<TaskResult>> results(config.rounds.size());
  const auto run_start = Clock::now();

  for (std::size_t round_idx = 0; round_idx < config.rounds.size();
       ++round_idx) {
    const Round& round = config.rounds[round_idx];
    auto& round_results = results[round_idx];
    round_results.resize(round.tasks.size());

    const double interval =
        round.send_rate > 0 ? 1.0 / round.send_rate : 0.0;
    const auto round_zero = Clock::now();
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= round.tasks.size()) return;
        const auto scheduled =
            round_zero + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(i * interval));
        std::this_thread::sleep_until(scheduled);
        const TaskSpec& spec = round.tasks[i];
        TaskResult r;
        r.scheduled_s = seconds_between(run_start, scheduled);
        r.started_s = seconds_between(run_start, Clock::now());
        try {
          switch (spec.kind) {
            case TaskKind::Issue: {
              auto receipt =
                  host->issue_transaction(principal(spec.issuer), spec.op,
                                          spec.args);
              r.ok = true;
              r.tx_id = receipt.tx_id;
              break;
            }
            case TaskKind::Cancel: {
              const TxId& target =
                  results[spec.cancel_round][spec.cancel_index].tx_id;
              auto outcome =
                  evo->cancel_transaction(principal(spec.issuer), target);
              r.ok = true;
              r.tx_id = outcome.receipt.tx_id;
              r.cascade = static_cast<int>(outcome.cascade_set.size());
              break;
            }
            case TaskKind::Query: {
              auto view = host->get_asset(spec.query_key);
              r.ok = true;
              r.view_present = view.has_value();
              break;
            }
          }
        } catch (const Error& e) {
          r.ok = false;
          r.code = e.code();
        } catch (const std::exception&) {
          r.ok = false;
          r.code = ErrorCode::ValidationFailed;
        }
        r.finished_s = seconds_between(run_start, Clock::now());
        round_results[i] = r;
      }
    };

    {
      std::vector<std::thread> pool;
      const int count = std::max(1, config.workers);
      pool.reserve(static_cast<std::size_t>(count));
      for (int w = 0; w < count; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    // Functional check before anything else builds on this round.
    for (std::size_t i = 0; i < round.tasks.size(); ++i) {
      const auto& spec = round.tasks[i];
      const auto& r = round_results[i];
      if (round.expect_all_ok && !r.ok) {
        throw Error(ErrorCode::ScenarioAssertionFailed,
                    report.scenario + " round " + std::to_string(round_idx) +
                        " (" + round.label + ") task " + std::to_string(i) +
                        " failed: " + std::string(to_string(r.code)));
      }
      if (spec.kind == TaskKind::Cancel && round.expected_cascade >= 0 &&
          r.ok && r.cascade != round.expected_cascade) {
        throw Error(ErrorCode::ScenarioAssertionFailed,
                    report.scenario + " round " + std::to_string(round_idx) +
                        " (" + round.label + ") task " + std::to_string(i) +
                        ": expected cascade " +
                        std::to_string(round.expected_cascade) + ", got " +
                        std::to_string(r.cascade));
      }
    }

    RoundMetrics m;
    m.round = static_cast<int>(round_idx);
    m.op = round_op(round);
    m.submitted = static_cast<int>(round.tasks.size());
    m.send_rate_requested = round.send_rate;
    if (!round_results.empty()) {
      double first_scheduled = std::numeric_limits<double>::max();
      double last_finished = 0;
      double latency_sum = 0;
      for (const auto& r : round_results) {
        first_scheduled = std::min(first_scheduled, r.scheduled_s);
        last_finished = std::max(last_finished, r.finished_s);
        latency_sum += r.finished_s - r.started_s;
        if (r.ok) {
          ++m.accepted;
        } else {
          ++m.rejected;
        }
      }
      const double span = std::max(1e-9, last_finished - first_scheduled);
      m.send_rate_achieved = m.submitted / span;
      m.throughput_tps = m.accepted / span;
      m.avg_latency_ms = latency_sum / m.submitted * 1000.0;
    }
    m.mem_mb = peak_rss_mb();
    report.rounds.push_back(m);

    if (round.advance_after > 0) host->advance_by(round.advance_after);
  }

  // Functional digest: per-task outcomes in plan order, then the final view
  // bodies. Transaction ids and timestamps vary with worker interleaving and
  // are excluded on purpose.
  std::string material;
  for (std::size_t round_idx = 0; round_idx < results.size(); ++round_idx) {
    for (std::size_t i = 0; i < results[round_idx].size(); ++i) {
      const auto& r = results[round_idx][i];
      material += "r" + std::to_string(round_idx) + ":t" + std::to_string(i) +
                  ":ok=" + (r.ok ? "1" : "0");
      if (!r.ok) material += ":code=" + std::string(to_string(r.code));
      if (r.cascade >= 0) material += ":cascade=" + std::to_string(r.cascade);
      if (results[round_idx][i].view_present) material += ":view=1";
      material += "\n";
    }
  }
  for (const auto& key : config.digest_keys) {
    auto view = host->get_asset(key);
    material += "k:" + key + "=";
    material += view ? view->body.dump() : std::string("absent");
    material += "\n";
  }
  report.functional_digest = sha256_hex(material);
  return report;
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "# schema=" << kReportSchema << " scenario=" << report.scenario
      << " variant=" << report.variant << " seed=" << report.seed
      << " scale=" << report.scale << " workers=" << report.workers
      << " digest=" << report.functional_digest << "\n";
  out << "round,op,submitted,accepted,rejected,send_rate_requested,"
         "send_rate_achieved,avg_latency_ms,throughput_tps,mem_mb\n";
  out.setf(std::ios::fixed);
  out.precision(3);
  for (const auto& m : report.rounds) {
    out << m.round << ',' << m.op << ',' << m.submitted << ',' << m.accepted
        << ',' << m.rejected << ',' << m.send_rate_requested << ','
        << m.send_rate_achieved << ',' << m.avg_latency_ms << ','
        << m.throughput_tps << ',' << m.mem_mb << "\n";
  }
  return out.str();
}

json report_json(const MetricsReport& report) {
  json rounds = json::array();
  for (const auto& m : report.rounds) {
    rounds.push_back({{"round", m.round},
                      {"op", m.op},
                      {"submitted", m.submitted},
                      {"accepted", m.accepted},
                      {"rejected", m.rejected},
                      {"send_rate_requested", m.send_rate_requested},
                      {"send_rate_achieved", m.send_rate_achieved},
                      {"avg_latency_ms", m.avg_latency_ms},
                      {"throughput_tps", m.throughput_tps},
                      {"mem_mb", m.mem_mb}});
  }
  return {{"schema", kReportSchema},
          {"scenario", report.scenario},
          {"variant", report.variant},
          {"seed", report.seed},
          {"scale", report.scale},
          {"workers", report.workers},
          {"functional_digest", report.functional_digest},
          {"rounds", std::move(rounds)}};
}

std::filesystem::path report_emit(const MetricsReport& report,
                                  const std::string& format,
                                  const std::filesystem::path& out_path) {
  std::string payload;
  if (format == "csv") {
    payload = report_csv(report);
  } else if (format == "json") {
    payload = report_json(report).dump(2) + "\n";
  } else {
    throw Error(ErrorCode::ValidationFailed,
                "unknown report format '" + format + "'");
  }
  std::ofstream out(out_path, std::ios::trunc);
  out << payload;
  if (!out) {
    throw Error(ErrorCode::IoError,
                "could not write report to " + out_path.string());
  }
  return out_path;
}

double peak_rss_mb() {
  struct rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0.0;
  return static_cast<double>(usage.ru_maxrss) / 1024.0;  // kb on linux
}

}  // namespace evochain::bench
