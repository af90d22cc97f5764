#include "evochain/view_engine.hpp"

#include <algorithm>
#include <limits>

#include "evochain/canonical.hpp"

namespace evochain {

void AppRegistry::add(const std::string& op_name, OpSpec spec) {
  ops_[op_name] = std::move(spec);
}

bool AppRegistry::contains(const std::string& op_name) const {
  return ops_.contains(op_name);
}

const OpSpec& AppRegistry::require(const std::string& op_name) const {
  auto it = ops_.find(op_name);
  if (it == ops_.end()) {
    throw Error(ErrorCode::ValidationFailed,
                "unknown operation '" + op_name + "'");
  }
  return it->second;
}

std::vector<TxId> DependencyGraph::direct_dependencies(const TxId& id) const {
  std::vector<TxId> out;
  for (const auto& e : edges) {
    if (e.from == id) out.push_back(e.to);
  }
  return out;
}

std::vector<TxId> DependencyGraph::direct_dependents(const TxId& id) const {
  std::vector<TxId> out;
  for (const auto& e : edges) {
    if (e.to == id) out.push_back(e.from);
  }
  return out;
}

std::vector<TxId> DependencyGraph::reachable_dependents(const TxId& id) const {
  std::map<TxId, std::vector<TxId>> reverse;
  for (const auto& e : edges) reverse[e.to].push_back(e.from);
  std::set<TxId> seen;
  std::vector<TxId> frontier{id};
  while (!frontier.empty()) {
    TxId cur = frontier.back();
    frontier.pop_back();
    auto it = reverse.find(cur);
    if (it == reverse.end()) continue;
    for (const auto& child : it->second) {
      if (seen.insert(child).second) frontier.push_back(child);
    }
  }
  std::vector<TxId> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end(), [&](const TxId& a, const TxId& b) {
    return submission.at(a) < submission.at(b);
  });
  return out;
}

DependencyGraph build_graph(std::span<const MutableTransaction> txs) {
  std::vector<const MutableTransaction*> order;
  order.reserve(txs.size());
  for (const auto& tx : txs) order.push_back(&tx);
  std::sort(order.begin(), order.end(),
            [](const MutableTransaction* a, const MutableTransaction* b) {
              return a->submission_time < b->submission_time;
            });

  DependencyGraph g;
  for (const auto* tx : order) {
    g.nodes.push_back(tx->id);
    g.submission[tx->id] = tx->submission_time;
  }
  for (std::size_t bi = 0; bi < order.size(); ++bi) {
    const auto& b = *order[bi];
    for (const auto& [key, body] : b.writes) {
      const MutableTransaction* target = nullptr;
      for (std::size_t ai = 0; ai < bi; ++ai) {
        const auto& a = *order[ai];
        if (!a.writes.contains(key)) continue;
        // A record already canceled when b was issued was not live state;
        // b's true dependency is an earlier live writer (or none).
        const bool canceled_before_b =
            a.validity == Validity::Canceled && a.permanent_state_time &&
            *a.permanent_state_time <= b.submission_time;
        if (canceled_before_b) continue;
        target = &a;
      }
      if (target) g.edges.push_back(DependencyEdge{b.id, target->id, key});
    }
  }
  return g;
}

std::optional<ViewObject> generate_view(
    std::span<const MutableTransaction> history, const std::string& key,
    Timestamp as_of) {
  bool any_canceled = false;
  Timestamp max_canceled_pst = std::numeric_limits<Timestamp>::min();
  for (const auto& tx : history) {
    if (tx.validity != Validity::Canceled) continue;
    any_canceled = true;
    if (tx.permanent_state_time) {
      max_canceled_pst = std::max(max_canceled_pst, *tx.permanent_state_time);
    }
  }

  // Anchor: the most recent consolidated transaction whose submission
  // postdates the permanent-state time of every canceled one. Earlier
  // consolidated candidates have smaller submission times, so if the most
  // recent one fails the comparison none can pass.
  const MutableTransaction* anchor = nullptr;
  for (std::size_t i = history.size(); i-- > 0;) {
    const auto& tx = history[i];
    if (tx.validity != Validity::Consolidated) continue;
    if (!any_canceled || tx.submission_time > max_canceled_pst) {
      anchor = &tx;
    }
    break;
  }

  const MutableTransaction* last = nullptr;
  json body;
  if (anchor) {
    body = anchor->writes.at(key);
    last = anchor;
  }
  for (const auto& tx : history) {
    if (tx.validity == Validity::Canceled) continue;
    if (anchor && tx.submission_time <= anchor->submission_time) continue;
    body = tx.writes.at(key);
    last = &tx;
  }
  if (!last) return std::nullopt;
  return ViewObject{key, std::move(body), last->id, as_of};
}

// ---------------------------------------------------------------------------
// EvoEngine

class EvoEngine::EngineView : public AssetView {
 public:
  explicit EngineView(EvoEngine& engine) : engine_(engine) {}

  std::optional<json> get(const std::string& key) const override {
    engine_.consolidate_lazily(key, engine_.store_.now());
    auto history = engine_.store_.get_history(key);
    auto view = generate_view(history, key, engine_.store_.now());
    if (!view) return std::nullopt;
    return std::move(view->body);
  }

 private:
  EvoEngine& engine_;
};

EvoEngine::EvoEngine(LedgerStore store, AppConfig config, AppRegistry registry)
    : store_(std::move(store)),
      config_(std::move(config)),
      registry_(std::move(registry)) {
  // Rebuild the reverse dependency index from the committed log.
  for (const auto& block : store_.blocks()) {
    for (const auto& rec : block.txs) {
      if (const auto* mt = as_mutable(rec)) index_dependents(*mt);
    }
  }
}

Timestamp EvoEngine::now() const {
  std::scoped_lock lk(pipeline_);
  return store_.now();
}

void EvoEngine::advance_to(Timestamp t) {
  std::scoped_lock lk(pipeline_);
  store_.advance_to(t);
}

std::optional<MutableTransaction> EvoEngine::latest_live_writer(
    const std::string& key) const {
  auto ids = store_.history_ids(key);
  for (std::size_t i = ids.size(); i-- > 0;) {
    auto rec = store_.get_record(ids[i]);
    const auto* mt = as_mutable(rec);
    if (mt && mt->validity != Validity::Canceled) return *mt;
  }
  return std::nullopt;
}

std::vector<MutableTransaction> EvoEngine::dependencies_of(
    const MutableTransaction& tx) const {
  std::vector<MutableTransaction> deps;
  for (const auto& read : tx.reads) {
    auto dep = store_.find_writer(read.object_key, read.version);
    if (dep) deps.push_back(std::move(*dep));
  }
  return deps;
}

std::vector<TxId> EvoEngine::dependent_ids_of(const TxId& id) const {
  auto it = dependents_.find(id);
  return it == dependents_.end() ? std::vector<TxId>{} : it->second;
}

void EvoEngine::index_dependents(const MutableTransaction& tx) {
  for (const auto& read : tx.reads) {
    auto parent = store_.find_writer(read.object_key, read.version);
    if (parent) dependents_[parent->id].push_back(tx.id);
  }
}

std::optional<MutableTransaction> EvoEngine::find_trigger(
    const MutableTransaction& pending, const ConditionSpec& spec) const {
  // op index is in commit order, so the earliest matching trigger wins.
  for (const auto& id : store_.transactions_by_op(spec.trigger_op)) {
    auto rec = store_.get_record(id);
    const auto* candidate = as_mutable(rec);
    if (!candidate) continue;
    if (candidate->submission_time <= pending.submission_time) continue;
    if (candidate->validity == Validity::Canceled) continue;
    if (condition_satisfied(pending, *candidate, spec)) return *candidate;
  }
  return std::nullopt;
}

void EvoEngine::consolidate_tx(const TxId& id, Timestamp at,
                               std::set<TxId>& visited) {
  if (!visited.insert(id).second) return;
  auto rec = store_.find_record(id);
  const auto* mt = rec ? as_mutable(*rec) : nullptr;
  if (!mt || mt->validity != Validity::Pending) return;

  // A transaction consolidates only after all of its dependencies have; this
  // keeps C(B) => C(A) true in the marked state even when a dependency
  // carries a condition policy that has not triggered yet.
  bool deps_consolidated = true;
  for (const auto& read : mt->reads) {
    auto dep = store_.find_writer(read.object_key, read.version);
    if (!dep) continue;
    consolidate_tx(dep->id, at, visited);
    auto dep_rec = std::get<MutableTransaction>(store_.get_record(dep->id));
    if (dep_rec.validity != Validity::Consolidated) deps_consolidated = false;
  }
  if (!deps_consolidated) return;

  const auto& policy = config_.policy_for(mt->op_name);
  if (policy.kind == PolicyKind::Expiration) {
    if (is_expired(*mt, at)) {
      store_.update_validity(id, Validity::Consolidated, expiry_instant(*mt));
    }
    return;
  }
  if (!policy.condition) return;
  if (auto trigger = find_trigger(*mt, *policy.condition)) {
    store_.update_validity(id, Validity::Consolidated,
                           trigger->submission_time);
  }
}

void EvoEngine::consolidate_lazily(const std::string& key, Timestamp now) {
  std::scoped_lock lk(pipeline_);
  store_.advance_to(now);
  std::set<TxId> visited;
  for (const auto& id : store_.history_ids(key)) {
    consolidate_tx(id, store_.now(), visited);
  }
}

CommitReceipt EvoEngine::issue_transaction(const Principal& p,
                                           const std::string& op_name,
                                           const json& args) {
  std::scoped_lock lk(pipeline_);
  if (p.role == Role::Observer) {
    throw Error(ErrorCode::Unauthorized, "observers cannot issue transactions");
  }
  const OpSpec& spec = registry_.require(op_name);
  if (!spec.allowed_org_roles.empty()) {
    auto role = config_.role_of_org(p.org);
    if (!role || !spec.allowed_org_roles.contains(*role)) {
      throw Error(ErrorCode::Unauthorized,
                  "org '" + p.org + "' may not issue " + op_name);
    }
  }

  EngineView view(*this);
  auto writes = spec.handler(view, p, args);
  if (writes.empty()) {
    throw Error(ErrorCode::ValidationFailed, "operation writes no objects");
  }

  const MutationPolicy& policy = config_.policy_for(op_name);
  MutableTransaction mt;
  mt.submission_time = store_.peek_next();
  mt.validity = Validity::Pending;
  mt.delay = policy.kind == PolicyKind::Expiration ? policy.delay : 0;
  mt.issuer = p;
  mt.op_name = op_name;
  mt.writes = std::move(writes);

  std::map<std::string, MutableTransaction> priors;
  auto edges = derive_dependencies(
      mt, [&](const std::string& key) -> std::optional<MutableTransaction> {
        auto writer = latest_live_writer(key);
        if (writer) priors.emplace(key, *writer);
        return writer;
      });
  for (const auto& edge : edges) {
    mt.reads.push_back(ReadRef{edge.object_key,
                               priors.at(edge.object_key).submission_time});
  }

  if (policy.kind == PolicyKind::Expiration) {
    const Timestamp my_expiry = mt.submission_time + mt.delay;
    for (const auto& [key, dep] : priors) {
      if (dep.validity != Validity::Pending) continue;
      if (config_.policy_for(dep.op_name).kind != PolicyKind::Expiration) {
        continue;
      }
      if (expiry_instant(dep) > my_expiry) {
        throw Error(ErrorCode::DependencyExpiryViolation,
                    "dependency " + dep.id.hex + " expires at " +
                        std::to_string(expiry_instant(dep)) +
                        ", after this transaction (" +
                        std::to_string(my_expiry) + ")",
                    dep.id.hex);
      }
    }
  }

  mt.id = canonical::mt_id(mt);
  auto receipt = store_.commit(TransactionRecord{mt});
  index_dependents(mt);
  return receipt;
}

CancelOutcome EvoEngine::cancel_transaction(const Principal& p,
                                            const TxId& target) {
  std::scoped_lock lk(pipeline_);
  auto rec = store_.find_record(target);
  if (!rec) {
    throw Error(ErrorCode::NotFound, "no transaction " + target.hex,
                target.hex);
  }
  const auto* mt = as_mutable(*rec);
  if (!mt) {
    throw Error(ErrorCode::ValidationFailed,
                "canceling transactions cannot be canceled", target.hex);
  }
  const auto& rule = config_.policy_for(mt->op_name).cancel_rule;
  if (!authorize_cancel(p, *mt, rule)) {
    throw Error(ErrorCode::Unauthorized,
                "principal '" + p.name + "' may not cancel " + target.hex,
                target.hex);
  }

  const Timestamp now = store_.now();
  std::set<TxId> visited;
  consolidate_tx(target, now, visited);
  auto current = std::get<MutableTransaction>(store_.get_record(target));
  if (current.validity == Validity::Consolidated) {
    throw Error(ErrorCode::AlreadyConsolidated,
                "target is already consolidated", target.hex);
  }
  if (current.validity == Validity::Canceled) {
    throw Error(ErrorCode::AlreadyCanceled, "target is already canceled",
                target.hex);
  }

  // Transitive pending dependents cancel together with the target; one
  // consolidated dependent rejects the whole cancel.
  std::vector<std::pair<Timestamp, TxId>> cascade{
      {current.submission_time, target}};
  std::set<TxId> seen{target};
  std::vector<TxId> frontier{target};
  while (!frontier.empty()) {
    TxId cur = frontier.back();
    frontier.pop_back();
    for (const auto& child : dependent_ids_of(cur)) {
      if (!seen.insert(child).second) continue;
      consolidate_tx(child, now, visited);
      auto child_rec = std::get<MutableTransaction>(store_.get_record(child));
      if (child_rec.validity == Validity::Consolidated) {
        throw Error(ErrorCode::AlreadyConsolidated,
                    "dependent " + child.hex +
                        " is already consolidated; cancel rejected",
                    child.hex);
      }
      frontier.push_back(child);
      if (child_rec.validity == Validity::Pending) {
        cascade.emplace_back(child_rec.submission_time, child);
      }
    }
  }
  std::sort(cascade.begin(), cascade.end());

  CancelingTransaction ct;
  ct.submission_time = store_.peek_next();
  ct.issuer = p;
  ct.target = target;
  for (const auto& [sub, id] : cascade) ct.cascade_set.push_back(id);
  ct.id = canonical::ct_id(ct);

  auto receipt = store_.commit(TransactionRecord{ct});
  for (const auto& id : ct.cascade_set) {
    store_.update_validity(id, Validity::Canceled, ct.submission_time);
  }
  return CancelOutcome{receipt, ct.cascade_set};
}

std::optional<ViewObject> EvoEngine::get_asset(const std::string& key) {
  std::scoped_lock lk(pipeline_);
  return get_asset(key, store_.now());
}

std::optional<ViewObject> EvoEngine::get_asset(const std::string& key,
                                               Timestamp now) {
  std::scoped_lock lk(pipeline_);
  consolidate_lazily(key, now);
  auto history = store_.get_history(key);
  return generate_view(history, key, store_.now());
}

std::vector<MutableTransaction> EvoEngine::get_transactions(
    const std::string& key) {
  std::scoped_lock lk(pipeline_);
  return get_transactions(key, store_.now());
}

std::vector<MutableTransaction> EvoEngine::get_transactions(
    const std::string& key, Timestamp now) {
  std::scoped_lock lk(pipeline_);
  consolidate_lazily(key, now);
  return store_.get_history(key);
}

MutableTransaction EvoEngine::raise_delay(const Principal& p, const TxId& id,
                                          Duration new_delay) {
  std::scoped_lock lk(pipeline_);
  auto rec = store_.find_record(id);
  if (!rec) {
    throw Error(ErrorCode::NotFound, "no transaction " + id.hex, id.hex);
  }
  const auto* mt = as_mutable(*rec);
  if (!mt) {
    throw Error(ErrorCode::ValidationFailed,
                "canceling transactions carry no delay", id.hex);
  }
  auto deps = dependencies_of(*mt);
  std::vector<MutableTransaction> dependents;
  for (const auto& child : dependent_ids_of(id)) {
    dependents.push_back(
        std::get<MutableTransaction>(store_.get_record(child)));
  }
  auto updated = evochain::raise_delay(
      p, *mt, new_delay, deps, dependents,
      [this](const std::string& op) -> const MutationPolicy& {
        return config_.policy_for(op);
      });
  return store_.update_delay(id, updated.delay, store_.now());
}

// ---------------------------------------------------------------------------
// VanillaEngine

class VanillaEngine::DirectView : public AssetView {
 public:
  explicit DirectView(const VanillaEngine& engine) : engine_(engine) {}

  std::optional<json> get(const std::string& key) const override {
    auto ids = engine_.store_.history_ids(key);
    if (ids.empty()) return std::nullopt;
    auto rec = engine_.store_.get_record(ids.back());
    return std::get<MutableTransaction>(std::move(rec)).writes.at(key);
  }

 private:
  const VanillaEngine& engine_;
};

VanillaEngine::VanillaEngine(LedgerStore store, AppConfig config,
                             AppRegistry registry)
    : store_(std::move(store)),
      config_(std::move(config)),
      registry_(std::move(registry)) {}

Timestamp VanillaEngine::now() const {
  std::scoped_lock lk(pipeline_);
  return store_.now();
}

void VanillaEngine::advance_to(Timestamp t) {
  std::scoped_lock lk(pipeline_);
  store_.advance_to(t);
}

CommitReceipt VanillaEngine::issue_transaction(const Principal& p,
                                               const std::string& op_name,
                                               const json& args) {
  std::scoped_lock lk(pipeline_);
  if (p.role == Role::Observer) {
    throw Error(ErrorCode::Unauthorized, "observers cannot issue transactions");
  }
  const OpSpec& spec = registry_.require(op_name);
  if (!spec.allowed_org_roles.empty()) {
    auto role = config_.role_of_org(p.org);
    if (!role || !spec.allowed_org_roles.contains(*role)) {
      throw Error(ErrorCode::Unauthorized,
                  "org '" + p.org + "' may not issue " + op_name);
    }
  }
  DirectView view(*this);
  auto writes = spec.handler(view, p, args);
  if (writes.empty()) {
    throw Error(ErrorCode::ValidationFailed, "operation writes no objects");
  }
  MutableTransaction mt;
  mt.submission_time = store_.peek_next();
  mt.validity = Validity::Consolidated;
  mt.permanent_state_time = mt.submission_time;
  mt.delay = 0;
  mt.issuer = p;
  mt.op_name = op_name;
  mt.writes = std::move(writes);
  mt.id = canonical::mt_id(mt);
  return store_.commit(TransactionRecord{std::move(mt)});
}

std::optional<ViewObject> VanillaEngine::get_asset(const std::string& key) {
  std::scoped_lock lk(pipeline_);
  auto ids = store_.history_ids(key);
  if (ids.empty()) return std::nullopt;
  auto rec = store_.get_record(ids.back());
  auto mt = std::get<MutableTransaction>(std::move(rec));
  return ViewObject{key, mt.writes.at(key), mt.id, store_.now()};
}

std::vector<MutableTransaction> VanillaEngine::get_transactions(
    const std::string& key) {
  std::scoped_lock lk(pipeline_);
  return store_.get_history(key);
}

}  // namespace evochain
