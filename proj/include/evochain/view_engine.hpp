#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "evochain/config.hpp"
#include "evochain/ledger_store.hpp"
#include "evochain/mutation_policy.hpp"
#include "evochain/types.hpp"

namespace evochain {

// Read surface an operation handler validates against. Implementations
// resolve keys to the current generated view (controlled-mutability engine)
// or to the stored object (vanilla engine).
class AssetView {
 public:
  virtual ~AssetView() = default;
  virtual std::optional<json> get(const std::string& key) const = 0;
};

// An operation handler validates `args` against the view and returns the
// full post-state of every object the transaction writes. Domain failures
// are reported by throwing Error.
using OpHandler = std::function<std::map<std::string, json>(
    const AssetView& view, const Principal& issuer, const json& args)>;

struct OpSpec {
  // Org roles allowed to issue the op; empty means any non-observer.
  std::set<std::string> allowed_org_roles;
  OpHandler handler;
};

class AppRegistry {
 public:
  void add(const std::string& op_name, OpSpec spec);
  bool contains(const std::string& op_name) const;
  const OpSpec& require(const std::string& op_name) const;

 private:
  std::map<std::string, OpSpec> ops_;
};

struct DependencyGraph {
  std::vector<TxId> nodes;  // submission order
  std::vector<DependencyEdge> edges;

  std::vector<TxId> direct_dependencies(const TxId& id) const;
  std::vector<TxId> direct_dependents(const TxId& id) const;
  // Transitive dependents, submission order, `id` excluded.
  std::vector<TxId> reachable_dependents(const TxId& id) const;

  std::map<TxId, Timestamp> submission;  // node -> submission_time
};

// Recomputes edges from a history list alone: for each written key the
// latest prior writer that was live (not yet canceled) when the dependent
// was issued. A canceled record with permanent_state_time before the
// dependent's submission was already canceled at issue and is skipped.
DependencyGraph build_graph(std::span<const MutableTransaction> txs);

// View generation over one object's full history (submission order, current
// validity). Finds the most recent CONSOLIDATED anchor whose submission_time
// is strictly greater than the permanent_state_time of every CANCELED entry,
// starts from its payload, and applies every later non-CANCELED transaction
// in submission order; with no anchor it replays all non-CANCELED entries
// from an absent object. Yields nothing when no transaction applies.
std::optional<ViewObject> generate_view(
    std::span<const MutableTransaction> history, const std::string& key,
    Timestamp as_of);

// Common host surface the applications and the bench drive.
class AppHost {
 public:
  virtual ~AppHost() = default;

  virtual CommitReceipt issue_transaction(const Principal& p,
                                          const std::string& op_name,
                                          const json& args) = 0;
  virtual std::optional<ViewObject> get_asset(const std::string& key) = 0;
  virtual std::vector<MutableTransaction> get_transactions(
      const std::string& key) = 0;

  virtual Timestamp now() const = 0;
  virtual void advance_to(Timestamp t) = 0;
  void advance_by(Duration d) { advance_to(now() + d); }

  virtual LedgerStore& store() = 0;
  virtual std::string_view variant() const = 0;
};

struct CancelOutcome {
  CommitReceipt receipt;
  std::vector<TxId> cascade_set;
};

// Controlled-mutability engine: issues MTs under mutation policies, cancels
// with cascade, consolidates lazily at query time, and answers queries
// through generated views.
class EvoEngine : public AppHost {
 public:
  EvoEngine(LedgerStore store, AppConfig config, AppRegistry registry);

  CommitReceipt issue_transaction(const Principal& p,
                                  const std::string& op_name,
                                  const json& args) override;

  // Cancels `target` and every transitively dependent pending MT, all or
  // nothing. A consolidated transitive dependent blocks the cancel with
  // AlreadyConsolidated naming the blocking id.
  CancelOutcome cancel_transaction(const Principal& p, const TxId& target);

  std::optional<ViewObject> get_asset(const std::string& key) override;
  std::optional<ViewObject> get_asset(const std::string& key, Timestamp now);
  std::vector<MutableTransaction> get_transactions(
      const std::string& key) override;
  std::vector<MutableTransaction> get_transactions(const std::string& key,
                                                   Timestamp now);

  MutableTransaction raise_delay(const Principal& p, const TxId& id,
                                 Duration new_delay);

  // Lazy consolidation pass over one object's history. Idempotent.
  void consolidate_lazily(const std::string& key, Timestamp now);

  Timestamp now() const override;
  void advance_to(Timestamp t) override;
  LedgerStore& store() override { return store_; }
  std::string_view variant() const override { return "evochain"; }
  const AppConfig& config() const { return config_; }

 private:
  class EngineView;

  std::optional<MutableTransaction> latest_live_writer(
      const std::string& key) const;
  std::vector<MutableTransaction> dependencies_of(
      const MutableTransaction& tx) const;
  std::vector<TxId> dependent_ids_of(const TxId& id) const;
  void consolidate_tx(const TxId& id, Timestamp at, std::set<TxId>& visited);
  std::optional<MutableTransaction> find_trigger(
      const MutableTransaction& pending, const ConditionSpec& spec) const;
  void index_dependents(const MutableTransaction& tx);

  mutable std::recursive_mutex pipeline_;
  LedgerStore store_;
  AppConfig config_;
  AppRegistry registry_;
  std::map<TxId, std::vector<TxId>> dependents_;  // reverse edges
};

// Baseline engine without mutability: every transaction consolidates at
// commit and queries read the stored object state directly.
class VanillaEngine : public AppHost {
 public:
  VanillaEngine(LedgerStore store, AppConfig config, AppRegistry registry);

  CommitReceipt issue_transaction(const Principal& p,
                                  const std::string& op_name,
                                  const json& args) override;
  std::optional<ViewObject> get_asset(const std::string& key) override;
  std::vector<MutableTransaction> get_transactions(
      const std::string& key) override;

  Timestamp now() const override;
  void advance_to(Timestamp t) override;
  LedgerStore& store() override { return store_; }
  std::string_view variant() const override { return "vanilla"; }
  const AppConfig& config() const { return config_; }

 private:
  class DirectView;

  mutable std::recursive_mutex pipeline_;
  LedgerStore store_;
  AppConfig config_;
  AppRegistry registry_;
};

}  // namespace evochain
