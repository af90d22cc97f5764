#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evochain/block.hpp"
#include "evochain/types.hpp"

namespace evochain {

inline constexpr std::string_view kLedgerFormat = "evochain-ledger/1";
inline constexpr std::string_view kLedgerFileName = "ledger.jsonl";
inline constexpr std::string_view kJournalFileName = "validity.jsonl";

// One mutation journal record. Exactly one of new_validity / new_delay is
// set: validity transitions and admin delay raises. Block bytes are never
// rewritten; replaying blocks plus the journal reproduces the world state.
struct JournalEntry {
  TxId tx_id;
  std::optional<Validity> new_validity;
  std::optional<Duration> new_delay;
  Timestamp at{0};
};

struct ChainVerification {
  bool ok{true};
  std::optional<std::uint64_t> first_bad_height;
  std::string detail;
};

// Append-only block log plus world state plus mutation journal.
//
// World state namespaces:
//   tx:<TxId>        -> current transaction record (validity kept up to date)
//   idx:<object_key> -> ordered list of MT ids that wrote the object
//
// The store is single-writer; engines serialize access. Persistence is a
// header line followed by one canonical JSON block per line; the journal is
// one canonical JSON entry per line. In-memory stores keep the identical
// line images so replay semantics do not depend on the backing.
class LedgerStore {
 public:
  LedgerStore();  // in-memory, genesis block only

  static LedgerStore create(const std::filesystem::path& dir);
  static LedgerStore open(const std::filesystem::path& dir);
  static LedgerStore from_bytes(std::string_view ledger_bytes,
                                std::string_view journal_bytes);

  LedgerStore(LedgerStore&&) = default;
  LedgerStore& operator=(LedgerStore&&) = default;

  // Appends one new block holding `tx`, updates world state, advances the
  // clock to tx's submission_time (which must be > now(), normally
  // peek_next()). Throws DuplicateTxId.
  CommitReceipt commit(TransactionRecord tx);

  // Applies validity_transition to the tx: record and journals the change.
  TransactionRecord update_validity(const TxId& id, Validity target,
                                    Timestamp at);

  // Raises the stored delay of a pending MT and journals the change.
  // Policy checks live in mutation_policy; this is the persistence step.
  MutableTransaction update_delay(const TxId& id, Duration new_delay,
                                  Timestamp at);

  TransactionRecord get_record(const TxId& id) const;  // throws NotFound
  std::optional<TransactionRecord> find_record(const TxId& id) const;

  // Full history of an object: every MT that wrote it, submission order,
  // with current validity.
  std::vector<MutableTransaction> get_history(const std::string& key) const;
  std::vector<TxId> history_ids(const std::string& key) const;

  // The writer of `key` whose submission_time equals `version`.
  std::optional<MutableTransaction> find_writer(const std::string& key,
                                                Timestamp version) const;

  // Committed MTs carrying `op_name`, commit order.
  const std::vector<TxId>& transactions_by_op(const std::string& op) const;

  // Recomputes every block hash from its preimage and checks the links.
  ChainVerification verify_chain() const;

  Timestamp now() const noexcept { return clock_; }
  Timestamp peek_next() const noexcept { return clock_ + 1; }
  void advance_to(Timestamp t);  // clock never decreases

  std::uint64_t height() const noexcept { return blocks_.back().height; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  const std::vector<JournalEntry>& journal() const noexcept { return journal_; }

  // Canonical world-state image: {key: {record, version}}, keys sorted.
  json world_state_json() const;

  // Exact persisted line images (header + blocks / journal entries).
  std::string ledger_bytes() const;
  std::string journal_bytes() const;

  bool file_backed() const noexcept { return dir_.has_value(); }
  const std::optional<std::filesystem::path>& directory() const noexcept {
    return dir_;
  }

 private:
  struct Entry {
    json record;
    Timestamp version{0};
  };

  void append_genesis();
  void apply_commit_to_state(const TransactionRecord& tx);
  TransactionRecord apply_journal_entry(const JournalEntry& entry,
                                        bool replaying);
  void persist_line(std::ofstream& out, const std::string& line);
  Entry& tx_entry(const TxId& id);
  const Entry* find_tx_entry(const TxId& id) const;

  std::map<std::string, Entry> state_;
  std::vector<Block> blocks_;
  std::vector<JournalEntry> journal_;
  std::vector<std::string> ledger_lines_;   // [0] = header
  std::vector<std::string> journal_lines_;
  std::map<std::string, std::vector<TxId>> op_index_;
  Timestamp clock_{0};

  std::optional<std::filesystem::path> dir_;
  std::ofstream ledger_out_;
  std::ofstream journal_out_;
};

}  // namespace evochain
