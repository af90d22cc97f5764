#include "evochain/canonical.hpp"

#include "evochain/block.hpp"
#include "evochain/hash.hpp"

namespace evochain::canonical {

std::string dump(const json& value) { return value.dump(); }

json principal_json(const Principal& p) {
  return json{{"name", p.name}, {"org", p.org}, {"role", to_string(p.role)}};
}

Principal principal_from(const json& j) {
  return Principal{j.at("name").get<std::string>(),
                   j.at("org").get<std::string>(),
                   role_from_string(j.at("role").get<std::string>())};
}

namespace {

json reads_json(const std::vector<ReadRef>& reads) {
  json arr = json::array();
  for (const auto& r : reads) {
    arr.push_back(json{{"object_key", r.object_key}, {"version", r.version}});
  }
  return arr;
}

json writes_json(const std::map<std::string, json>& writes) {
  json obj = json::object();
  for (const auto& [key, body] : writes) obj[key] = body;
  return obj;
}

// TxId preimages cover only the identity fields: issuer, op, payload and
// submission_time. Validity, permanent_state_time, delay and reads may
// change after commit and must not move the id.
json mt_id_preimage(const MutableTransaction& tx) {
  return json{{"issuer", principal_json(tx.issuer)},
              {"op", tx.op_name},
              {"submission_time", tx.submission_time},
              {"writes", writes_json(tx.writes)}};
}

json ct_id_preimage(const CancelingTransaction& ct) {
  return json{{"issuer", principal_json(ct.issuer)},
              {"kind", "ct"},
              {"submission_time", ct.submission_time},
              {"target", ct.target.hex}};
}

}  // namespace

TxId mt_id(const MutableTransaction& tx) {
  return TxId{sha256_hex(dump(mt_id_preimage(tx)))};
}

TxId ct_id(const CancelingTransaction& ct) {
  return TxId{sha256_hex(dump(ct_id_preimage(ct)))};
}

json record_json(const TransactionRecord& rec) {
  if (const auto* mt = as_mutable(rec)) {
    json j{{"delay", mt->delay},
           {"id", mt->id.hex},
           {"issuer", principal_json(mt->issuer)},
           {"kind", "mt"},
           {"op", mt->op_name},
           {"reads", reads_json(mt->reads)},
           {"submission_time", mt->submission_time},
           {"validity", to_string(mt->validity)},
           {"writes", writes_json(mt->writes)}};
    j["permanent_state_time"] = mt->permanent_state_time
                                    ? json(*mt->permanent_state_time)
                                    : json(nullptr);
    return j;
  }
  const auto& ct = std::get<CancelingTransaction>(rec);
  json cascade = json::array();
  for (const auto& id : ct.cascade_set) cascade.push_back(id.hex);
  return json{{"cascade_set", cascade},
              {"id", ct.id.hex},
              {"issuer", principal_json(ct.issuer)},
              {"kind", "ct"},
              {"submission_time", ct.submission_time},
              {"target", ct.target.hex}};
}

TransactionRecord record_from(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "mt") {
    MutableTransaction mt;
    mt.id = TxId{j.at("id").get<std::string>()};
    mt.submission_time = j.at("submission_time").get<Timestamp>();
    if (!j.at("permanent_state_time").is_null()) {
      mt.permanent_state_time = j.at("permanent_state_time").get<Timestamp>();
    }
    mt.validity = validity_from_string(j.at("validity").get<std::string>());
    mt.delay = j.at("delay").get<Duration>();
    mt.issuer = principal_from(j.at("issuer"));
    mt.op_name = j.at("op").get<std::string>();
    for (const auto& [key, body] : j.at("writes").items()) {
      mt.writes.emplace(key, body);
    }
    for (const auto& r : j.at("reads")) {
      mt.reads.push_back(ReadRef{r.at("object_key").get<std::string>(),
                                 r.at("version").get<Timestamp>()});
    }
    return mt;
  }
  if (kind == "ct") {
    CancelingTransaction ct;
    ct.id = TxId{j.at("id").get<std::string>()};
    ct.submission_time = j.at("submission_time").get<Timestamp>();
    ct.issuer = principal_from(j.at("issuer"));
    ct.target = TxId{j.at("target").get<std::string>()};
    for (const auto& id : j.at("cascade_set")) {
      ct.cascade_set.push_back(TxId{id.get<std::string>()});
    }
    return ct;
  }
  throw Error(ErrorCode::CorruptLedger, "unknown record kind '" + kind + "'");
}

}  // namespace evochain::canonical

namespace evochain {

std::string block_preimage(std::uint64_t height, const std::string& prev_hash,
                           const std::vector<TransactionRecord>& txs) {
  json tx_list = json::array();
  for (const auto& tx : txs) tx_list.push_back(canonical::record_json(tx));
  return canonical::dump(json{
      {"height", height}, {"prev_hash", prev_hash}, {"txs", tx_list}});
}

json block_json(const Block& b) {
  json tx_list = json::array();
  for (const auto& tx : b.txs) tx_list.push_back(canonical::record_json(tx));
  return json{{"block_hash", b.block_hash},
              {"height", b.height},
              {"prev_hash", b.prev_hash},
              {"txs", tx_list}};
}

Block block_from(const json& j) {
  Block b;
  b.height = j.at("height").get<std::uint64_t>();
  b.prev_hash = j.at("prev_hash").get<std::string>();
  b.block_hash = j.at("block_hash").get<std::string>();
  for (const auto& tx : j.at("txs")) {
    b.txs.push_back(canonical::record_from(tx));
  }
  b.hash_preimage = block_preimage(b.height, b.prev_hash, b.txs);
  return b;
}

}  // namespace evochain
