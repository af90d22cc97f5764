#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evochain/types.hpp"

namespace evochain {

inline constexpr std::string_view kGenesisPrevHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

struct Block {
  std::uint64_t height{0};
  std::string prev_hash;
  std::vector<TransactionRecord> txs;
  std::string block_hash;  // digest of {height, prev_hash, txs}

  // Canonical bytes the hash covers, kept alongside so chain verification
  // re-hashes exactly what was committed or loaded.
  std::string hash_preimage;
};

json block_json(const Block& b);
Block block_from(const json& j);

// Canonical {height, prev_hash, txs} encoding (the digest preimage).
std::string block_preimage(std::uint64_t height, const std::string& prev_hash,
                           const std::vector<TransactionRecord>& txs);

}  // namespace evochain
