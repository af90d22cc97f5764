#include "evochain/ledger_store.hpp"

#include <algorithm>
#include <sstream>

#include "evochain/canonical.hpp"
#include "evochain/hash.hpp"

namespace evochain {

namespace {

json journal_entry_json(const JournalEntry& e) {
  json j{{"at", e.at}, {"tx_id", e.tx_id.hex}};
  if (e.new_validity) j["new_validity"] = to_string(*e.new_validity);
  if (e.new_delay) j["new_delay"] = *e.new_delay;
  return j;
}

JournalEntry journal_entry_from(const json& j) {
  JournalEntry e;
  e.tx_id = TxId{j.at("tx_id").get<std::string>()};
  e.at = j.at("at").get<Timestamp>();
  if (j.contains("new_validity")) {
    e.new_validity =
        validity_from_string(j.at("new_validity").get<std::string>());
  }
  if (j.contains("new_delay")) e.new_delay = j.at("new_delay").get<Duration>();
  if (e.new_validity.has_value() == e.new_delay.has_value()) {
    throw Error(ErrorCode::CorruptLedger,
                "journal entry must set exactly one of new_validity/new_delay");
  }
  return e;
}

std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    if (nl > pos) lines.push_back(bytes.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

std::string tx_state_key(const TxId& id) { return "tx:" + id.hex; }
std::string idx_state_key(const std::string& object_key) {
  return "idx:" + object_key;
}

}  // namespace

LedgerStore::LedgerStore() {
  ledger_lines_.push_back(canonical::dump(
      json{{"digest", kDigestAlgorithm}, {"format", kLedgerFormat}}));
  append_genesis();
}

void LedgerStore::append_genesis() {
  Block genesis;
  genesis.height = 0;
  genesis.prev_hash = kGenesisPrevHash;
  genesis.hash_preimage =
      block_preimage(genesis.height, genesis.prev_hash, genesis.txs);
  genesis.block_hash = sha256_hex(genesis.hash_preimage);
  ledger_lines_.push_back(canonical::dump(block_json(genesis)));
  blocks_.push_back(std::move(genesis));
}

LedgerStore LedgerStore::create(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto ledger_path = dir / kLedgerFileName;
  if (std::filesystem::exists(ledger_path)) {
    throw Error(ErrorCode::IoError,
                "ledger already initialized at " + ledger_path.string());
  }
  LedgerStore store;
  store.dir_ = dir;
  store.ledger_out_.open(ledger_path, std::ios::out | std::ios::trunc);
  store.journal_out_.open(dir / kJournalFileName,
                          std::ios::out | std::ios::trunc);
  if (!store.ledger_out_ || !store.journal_out_) {
    throw Error(ErrorCode::IoError, "cannot create ledger files in " +
                                        dir.string());
  }
  for (const auto& line : store.ledger_lines_) {
    store.persist_line(store.ledger_out_, line);
  }
  return store;
}

LedgerStore LedgerStore::open(const std::filesystem::path& dir) {
  const auto read_all = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::in | std::ios::binary);
    if (!in) {
      throw Error(ErrorCode::IoError, "cannot open " + p.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const auto journal_path = dir / kJournalFileName;
  std::string journal_bytes;
  if (std::filesystem::exists(journal_path)) {
    journal_bytes = read_all(journal_path);
  }
  LedgerStore store =
      from_bytes(read_all(dir / kLedgerFileName), journal_bytes);
  store.dir_ = dir;
  store.ledger_out_.open(dir / kLedgerFileName,
                         std::ios::out | std::ios::app);
  store.journal_out_.open(journal_path, std::ios::out | std::ios::app);
  if (!store.ledger_out_ || !store.journal_out_) {
    throw Error(ErrorCode::IoError,
                "cannot open ledger files in " + dir.string());
  }
  return store;
}

LedgerStore LedgerStore::from_bytes(std::string_view ledger_bytes,
                                    std::string_view journal_bytes) {
  const auto lines = split_lines(ledger_bytes);
  if (lines.empty()) {
    throw Error(ErrorCode::CorruptLedger, "missing ledger header");
  }
  json header;
  try {
    header = json::parse(lines.front());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptLedger,
                std::string("unparsable ledger header: ") + e.what());
  }
  if (header.value("format", "") != kLedgerFormat) {
    throw Error(ErrorCode::CorruptLedger, "unsupported ledger format");
  }
  if (header.value("digest", "") != kDigestAlgorithm) {
    throw Error(ErrorCode::CorruptLedger, "unsupported digest algorithm");
  }

  LedgerStore store;
  store.blocks_.clear();
  store.state_.clear();
  store.ledger_lines_.clear();
  store.ledger_lines_.emplace_back(lines.front());

  for (std::size_t i = 1; i < lines.size(); ++i) {
    Block block;
    try {
      block = block_from(json::parse(lines[i]));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptLedger,
                  "unparsable block at line " + std::to_string(i) + ": " +
                      e.what());
    }
    if (block.height != store.blocks_.size()) {
      throw Error(ErrorCode::CorruptLedger,
                  "block height out of sequence at line " + std::to_string(i));
    }
    for (const auto& tx : block.txs) {
      store.apply_commit_to_state(tx);
      store.clock_ = std::max(store.clock_, record_submission_time(tx));
    }
    store.ledger_lines_.emplace_back(lines[i]);
    store.blocks_.push_back(std::move(block));
  }
  if (store.blocks_.empty()) {
    throw Error(ErrorCode::CorruptLedger, "missing genesis block");
  }

  for (const auto line : split_lines(journal_bytes)) {
    JournalEntry entry;
    try {
      entry = journal_entry_from(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptLedger,
                  std::string("unparsable journal entry: ") + e.what());
    }
    store.apply_journal_entry(entry, /*replaying=*/true);
    store.journal_lines_.emplace_back(line);
    store.journal_.push_back(entry);
    store.clock_ = std::max(store.clock_, entry.at);
  }
  return store;
}

void LedgerStore::persist_line(std::ofstream& out, const std::string& line) {
  if (!dir_) return;
  out << line << '\n';
  out.flush();
  if (!out) {
    throw Error(ErrorCode::IoError, "ledger write failed");
  }
}

LedgerStore::Entry& LedgerStore::tx_entry(const TxId& id) {
  auto it = state_.find(tx_state_key(id));
  if (it == state_.end()) {
    throw Error(ErrorCode::NotFound, "no transaction " + id.hex, id.hex);
  }
  return it->second;
}

const LedgerStore::Entry* LedgerStore::find_tx_entry(const TxId& id) const {
  auto it = state_.find(tx_state_key(id));
  return it == state_.end() ? nullptr : &it->second;
}

void LedgerStore::apply_commit_to_state(const TransactionRecord& tx) {
  const TxId& id = record_id(tx);
  const auto key = tx_state_key(id);
  if (state_.contains(key)) {
    throw Error(ErrorCode::DuplicateTxId, "transaction already committed",
                id.hex);
  }
  const Timestamp sub = record_submission_time(tx);
  state_[key] = Entry{canonical::record_json(tx), sub};
  if (const auto* mt = as_mutable(tx)) {
    for (const auto& [object_key, body] : mt->writes) {
      auto& entry = state_[idx_state_key(object_key)];
      if (!entry.record.is_array()) entry.record = json::array();
      entry.record.push_back(id.hex);
      entry.version = sub;
    }
    op_index_[mt->op_name].push_back(id);
  }
}

CommitReceipt LedgerStore::commit(TransactionRecord tx) {
  const Timestamp sub = record_submission_time(tx);
  if (sub <= clock_) {
    throw Error(ErrorCode::IllegalTransition,
                "submission_time must advance the clock (clock=" +
                    std::to_string(clock_) + ", got " + std::to_string(sub) +
                    ")");
  }
  if (const auto* mt = as_mutable(tx)) {
    if (mt->delay < 0) {
      throw Error(ErrorCode::ValidationFailed, "negative delay", mt->id.hex);
    }
    const bool pending = mt->validity == Validity::Pending;
    if (pending == mt->permanent_state_time.has_value()) {
      throw Error(ErrorCode::ValidationFailed,
                  "permanent_state_time must be set exactly when not pending",
                  mt->id.hex);
    }
  }
  apply_commit_to_state(tx);

  Block block;
  block.height = blocks_.size();
  block.prev_hash = blocks_.back().block_hash;
  block.txs.push_back(std::move(tx));
  block.hash_preimage =
      block_preimage(block.height, block.prev_hash, block.txs);
  block.block_hash = sha256_hex(block.hash_preimage);

  const auto& committed = block.txs.front();
  CommitReceipt receipt{record_id(committed), block.height, sub};
  ledger_lines_.push_back(canonical::dump(block_json(block)));
  persist_line(ledger_out_, ledger_lines_.back());
  blocks_.push_back(std::move(block));
  clock_ = sub;
  return receipt;
}

TransactionRecord LedgerStore::apply_journal_entry(const JournalEntry& entry,
                                                   bool) {
  auto& entry_ref = tx_entry(entry.tx_id);
  auto rec = canonical::record_from(entry_ref.record);
  const auto* mt = as_mutable(rec);
  if (!mt) {
    throw Error(ErrorCode::IllegalTransition,
                "journal entries only apply to mutable transactions",
                entry.tx_id.hex);
  }
  MutableTransaction updated = *mt;
  if (entry.new_validity) {
    updated = validity_transition(*mt, *entry.new_validity, entry.at);
  } else {
    if (mt->validity != Validity::Pending) {
      throw Error(ErrorCode::IllegalTransition,
                  "delay can only change while pending", mt->id.hex);
    }
    if (*entry.new_delay < 0) {
      throw Error(ErrorCode::ValidationFailed, "negative delay", mt->id.hex);
    }
    updated.delay = *entry.new_delay;
  }
  entry_ref.record = canonical::record_json(TransactionRecord{updated});
  entry_ref.version = entry.at;
  // The journal timestamp has been observed; replay derives the clock from
  // it, so the live clock must cover it too.
  clock_ = std::max(clock_, entry.at);
  return TransactionRecord{std::move(updated)};
}

TransactionRecord LedgerStore::update_validity(const TxId& id, Validity target,
                                               Timestamp at) {
  JournalEntry entry{id, target, std::nullopt, at};
  auto updated = apply_journal_entry(entry, /*replaying=*/false);
  journal_lines_.push_back(canonical::dump(journal_entry_json(entry)));
  persist_line(journal_out_, journal_lines_.back());
  journal_.push_back(std::move(entry));
  return updated;
}

MutableTransaction LedgerStore::update_delay(const TxId& id, Duration new_delay,
                                             Timestamp at) {
  JournalEntry entry{id, std::nullopt, new_delay, at};
  auto updated = apply_journal_entry(entry, /*replaying=*/false);
  journal_lines_.push_back(canonical::dump(journal_entry_json(entry)));
  persist_line(journal_out_, journal_lines_.back());
  journal_.push_back(std::move(entry));
  return std::get<MutableTransaction>(std::move(updated));
}

TransactionRecord LedgerStore::get_record(const TxId& id) const {
  const auto* entry = find_tx_entry(id);
  if (!entry) {
    throw Error(ErrorCode::NotFound, "no transaction " + id.hex, id.hex);
  }
  return canonical::record_from(entry->record);
}

std::optional<TransactionRecord> LedgerStore::find_record(
    const TxId& id) const {
  const auto* entry = find_tx_entry(id);
  if (!entry) return std::nullopt;
  return canonical::record_from(entry->record);
}

std::vector<TxId> LedgerStore::history_ids(const std::string& key) const {
  auto it = state_.find(idx_state_key(key));
  if (it == state_.end()) return {};
  std::vector<TxId> ids;
  for (const auto& id : it->second.record) {
    ids.push_back(TxId{id.get<std::string>()});
  }
  return ids;
}

std::vector<MutableTransaction> LedgerStore::get_history(
    const std::string& key) const {
  std::vector<MutableTransaction> history;
  for (const auto& id : history_ids(key)) {
    auto rec = get_record(id);
    history.push_back(std::get<MutableTransaction>(std::move(rec)));
  }
  return history;
}

std::optional<MutableTransaction> LedgerStore::find_writer(
    const std::string& key, Timestamp version) const {
  auto it = state_.find(idx_state_key(key));
  if (it == state_.end()) return std::nullopt;
  for (const auto& id : it->second.record) {
    const auto* entry = find_tx_entry(TxId{id.get<std::string>()});
    if (entry && entry->record.at("submission_time").get<Timestamp>() ==
                     version) {
      return std::get<MutableTransaction>(
          canonical::record_from(entry->record));
    }
  }
  return std::nullopt;
}

const std::vector<TxId>& LedgerStore::transactions_by_op(
    const std::string& op) const {
  static const std::vector<TxId> empty;
  auto it = op_index_.find(op);
  return it == op_index_.end() ? empty : it->second;
}

ChainVerification LedgerStore::verify_chain() const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.height != i) {
      return {false, i, "height out of sequence"};
    }
    const std::string expected_prev =
        i == 0 ? std::string(kGenesisPrevHash) : blocks_[i - 1].block_hash;
    if (b.prev_hash != expected_prev) {
      return {false, i, "previous-hash link broken"};
    }
    if (sha256_hex(b.hash_preimage) != b.block_hash) {
      return {false, i, "block digest mismatch"};
    }
  }
  return {true, std::nullopt, ""};
}

void LedgerStore::advance_to(Timestamp t) {
  clock_ = std::max(clock_, t);
}

json LedgerStore::world_state_json() const {
  json out = json::object();
  for (const auto& [key, entry] : state_) {
    out[key] = json{{"record", entry.record}, {"version", entry.version}};
  }
  return out;
}

std::string LedgerStore::ledger_bytes() const {
  std::string out;
  for (const auto& line : ledger_lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

std::string LedgerStore::journal_bytes() const {
  std::string out;
  for (const auto& line : journal_lines_) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace evochain
