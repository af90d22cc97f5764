#include "oracle.hpp"

#include <algorithm>

#include "evochain/view_engine.hpp"

namespace evochain::testing {

namespace {

[[noreturn]] void violation(const std::string& message) {
  throw Error(ErrorCode::ScenarioAssertionFailed, message);
}

}  // namespace

std::optional<json> oracle_view(const std::vector<MutableTransaction>& history,
                                const std::string& key) {
  const MutableTransaction* last = nullptr;
  for (const auto& tx : history) {
    if (tx.validity != Validity::Canceled) last = &tx;
  }
  if (!last) return std::nullopt;
  return last->writes.at(key);
}

std::map<TxId, Validity> validity_snapshot(const LedgerStore& store) {
  std::map<TxId, Validity> out;
  for (const auto& tx : all_mutable(store)) out[tx.id] = tx.validity;
  return out;
}

std::vector<MutableTransaction> all_mutable(const LedgerStore& store) {
  std::vector<MutableTransaction> out;
  for (const auto& block : store.blocks()) {
    for (const auto& rec : block.txs) {
      if (const auto* mt = as_mutable(rec)) {
        out.push_back(
            std::get<MutableTransaction>(store.get_record(mt->id)));
      }
    }
  }
  return out;
}

std::set<TxId> reads_reachable_dependents(const LedgerStore& store,
                                          const TxId& root) {
  std::map<TxId, std::set<TxId>> reverse;
  for (const auto& tx : all_mutable(store)) {
    for (const auto& read : tx.reads) {
      auto writer = store.find_writer(read.object_key, read.version);
      if (writer) reverse[writer->id].insert(tx.id);
    }
  }
  std::set<TxId> seen;
  std::vector<TxId> frontier{root};
  while (!frontier.empty()) {
    TxId cur = frontier.back();
    frontier.pop_back();
    auto it = reverse.find(cur);
    if (it == reverse.end()) continue;
    for (const auto& child : it->second) {
      if (seen.insert(child).second) frontier.push_back(child);
    }
  }
  return seen;
}

void check_monotonic(const std::map<TxId, Validity>& before,
                     const std::map<TxId, Validity>& after) {
  for (const auto& [id, prev] : before) {
    auto it = after.find(id);
    if (it == after.end()) {
      violation("transaction " + id.hex + " disappeared from the store");
    }
    if (prev == it->second) continue;
    if (prev != Validity::Pending) {
      violation("terminal validity of " + id.hex + " changed from " +
                std::string(to_string(prev)) + " to " +
                std::string(to_string(it->second)));
    }
  }
}

void check_dependency_implication(const LedgerStore& store) {
  for (const auto& tx : all_mutable(store)) {
    for (const auto& read : tx.reads) {
      auto writer = store.find_writer(read.object_key, read.version);
      if (!writer) {
        violation("read of " + tx.id.hex + " resolves to no writer for " +
                  read.object_key);
      }
      if (tx.validity == Validity::Consolidated &&
          writer->validity != Validity::Consolidated) {
        violation("consolidated " + tx.id.hex + " depends on " +
                  std::string(to_string(writer->validity)) + " " +
                  writer->id.hex);
      }
      if (tx.validity != Validity::Canceled &&
          writer->validity == Validity::Canceled) {
        violation("surviving " + tx.id.hex + " depends on canceled " +
                  writer->id.hex);
      }
    }
  }
}

void check_chain(const LedgerStore& store) {
  auto result = store.verify_chain();
  if (!result.ok) violation("hash chain broken: " + result.detail);
}

void check_replay(const LedgerStore& store) {
  auto replayed =
      LedgerStore::from_bytes(store.ledger_bytes(), store.journal_bytes());
  if (replayed.height() != store.height()) {
    violation("replay height mismatch");
  }
  if (replayed.world_state_json() != store.world_state_json()) {
    violation("replayed world state differs from the live store");
  }
  // The clock is runtime state: a bare advance with no commit after it
  // leaves no record, so replay may land behind the live clock, never
  // ahead. World state equality above is clock-independent because every
  // recorded lifecycle change is in the journal.
  if (replayed.now() > store.now()) {
    violation("replayed clock is ahead of the live store");
  }
  auto chain = replayed.verify_chain();
  if (!chain.ok) violation("replayed chain broken: " + chain.detail);
}

void check_graph_reconstruction(const LedgerStore& store) {
  auto txs = all_mutable(store);
  auto graph = build_graph(txs);
  if (graph.nodes.size() != txs.size()) {
    violation("graph node count mismatch");
  }
  std::map<TxId, std::set<std::pair<std::string, TxId>>> reconstructed;
  for (const auto& edge : graph.edges) {
    reconstructed[edge.from].insert({edge.object_key, edge.to});
  }
  for (const auto& tx : txs) {
    std::set<std::pair<std::string, TxId>> stored;
    for (const auto& read : tx.reads) {
      auto writer = store.find_writer(read.object_key, read.version);
      if (!writer) {
        violation("read of " + tx.id.hex + " resolves to no writer");
      }
      stored.insert({read.object_key, writer->id});
    }
    auto it = reconstructed.find(tx.id);
    const auto& got =
        it == reconstructed.end()
            ? std::set<std::pair<std::string, TxId>>{}
            : it->second;
    if (got != stored) {
      violation("reconstructed dependencies of " + tx.id.hex +
                " differ from the stored reads");
    }
  }
}

}  // namespace evochain::testing
