#pragma once

#include <string>

#include "evochain/types.hpp"

// Canonical JSON encoding: object keys sorted lexicographically, no
// insignificant whitespace. nlohmann::json orders keys and dump() emits no
// whitespace, so canonical bytes are dump() of a normally built value.
// TxIds hash a reduced encoding that excludes the mutable fields (validity,
// permanent_state_time, delay, reads), so an id is stable across validity
// transitions and delay raises.

namespace evochain::canonical {

std::string dump(const json& value);

json principal_json(const Principal& p);
Principal principal_from(const json& j);

json record_json(const TransactionRecord& rec);
TransactionRecord record_from(const json& j);

TxId mt_id(const MutableTransaction& tx);
TxId ct_id(const CancelingTransaction& ct);

}  // namespace evochain::canonical
