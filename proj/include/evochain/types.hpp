#pragma once

#include <cstdint>
#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "evochain/errors.hpp"

namespace evochain {

using json = nlohmann::json;

// Logical clock units. The ledger clock is monotone and ticks at least one
// unit per commit, so no two committed transactions share a timestamp.
using Timestamp = std::int64_t;
using Duration = std::int64_t;

// Content hash of the canonical transaction encoding, hex encoded.
// Stable across validity transitions and delay changes.
struct TxId {
  std::string hex;

  auto operator<=>(const TxId&) const = default;
  bool empty() const noexcept { return hex.empty(); }
};

enum class Validity { Pending, Consolidated, Canceled };
enum class Role { Admin, User, Observer };

std::string_view to_string(Validity v);
std::string_view to_string(Role r);
Validity validity_from_string(std::string_view s);
Role role_from_string(std::string_view s);

struct Principal {
  std::string name;
  std::string org;
  Role role{Role::User};

  auto operator<=>(const Principal&) const = default;
};

// One consumed input: the object key and the submission_time of the writer
// whose state this transaction read. Doubles as the stored dependency edge.
struct ReadRef {
  std::string object_key;
  Timestamp version{0};

  auto operator<=>(const ReadRef&) const = default;
};

struct MutableTransaction {
  TxId id;
  Timestamp submission_time{0};
  std::optional<Timestamp> permanent_state_time;  // set when leaving Pending
  Validity validity{Validity::Pending};
  Duration delay{0};
  Principal issuer;
  std::string op_name;
  // Full post-state snapshot of every object this transaction writes.
  std::map<std::string, json> writes;
  std::vector<ReadRef> reads;

  bool operator==(const MutableTransaction&) const = default;
};

struct CancelingTransaction {
  TxId id;
  Timestamp submission_time{0};
  Principal issuer;
  TxId target;
  // Every transaction this CT moved to Canceled, target included,
  // in submission order. Fixed at commit.
  std::vector<TxId> cascade_set;

  bool operator==(const CancelingTransaction&) const = default;
};

using TransactionRecord = std::variant<MutableTransaction, CancelingTransaction>;

const TxId& record_id(const TransactionRecord& rec);
Timestamp record_submission_time(const TransactionRecord& rec);
bool is_mutable(const TransactionRecord& rec);
const MutableTransaction* as_mutable(const TransactionRecord& rec);
const CancelingTransaction* as_canceling(const TransactionRecord& rec);

// Dependency edge: `from` consumed the state that `to` wrote, so `to` must
// be the latest live (non-canceled) prior writer of `object_key`.
// Edges point backward in time: to.submission_time < from.submission_time.
struct DependencyEdge {
  TxId from;
  TxId to;
  std::string object_key;

  auto operator<=>(const DependencyEdge&) const = default;
};

struct CommitReceipt {
  TxId tx_id;
  std::uint64_t block_height{0};
  Timestamp submission_time{0};
};

struct ViewObject {
  std::string object_key;
  json body;
  TxId derived_from;  // last transaction applied to produce `body`
  Timestamp as_of{0};

  bool operator==(const ViewObject&) const = default;
};

inline Timestamp expiry_instant(const MutableTransaction& tx) {
  return tx.submission_time + tx.delay;
}

// Pending -> Consolidated | Canceled; terminal states never transition again.
// `at` becomes permanent_state_time and must not precede submission_time.
// All other fields are preserved bit for bit. Throws IllegalTransition.
MutableTransaction validity_transition(const MutableTransaction& tx,
                                       Validity target, Timestamp at);

// One edge per written object key that has a live prior writer; keys the
// transaction creates fresh contribute no edge. `latest_live_writer` must
// resolve a key to its most recent non-canceled writer in committed state.
std::vector<DependencyEdge> derive_dependencies(
    const MutableTransaction& tx,
    const std::function<std::optional<MutableTransaction>(const std::string&)>&
        latest_live_writer);

}  // namespace evochain
