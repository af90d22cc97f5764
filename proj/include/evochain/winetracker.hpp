#pragma once

#include <string>

#include "evochain/config.hpp"
#include "evochain/view_engine.hpp"

namespace evochain::app {

// Wine supply chain: growers create and sell grape batches, producers
// transform batches into bulk wine and sell it, fillers bottle it.
//
// Object keys:
//   grapes:<batch_id>   {attributes, batch_id, owner, quantity, splits[, ...]}
//   bulk:<bulk_id>      {bottles_filled, bulk_id, owner, source_batch, volume}
//   bottle:<bottle_id>  {bottle_id, owner, source_bulk}
//
// Operations (registered op names): createGrapes, sellGrapes,
// transformGrapes, sellBulk, fillBottles.

std::string grapes_key(const std::string& batch_id);
std::string bulk_key(const std::string& bulk_id);
std::string bottle_key(const std::string& bottle_id);

inline constexpr std::string_view kRoleGrower = "grower";
inline constexpr std::string_view kRoleProducer = "producer";
inline constexpr std::string_view kRoleFiller = "filler";
inline constexpr std::string_view kRoleDistributor = "distributor";

void register_winetracker_ops(AppRegistry& registry);

// Generic asset ops (createAsset / updateAsset) over keys asset:<id>.
// Used by the recovery walkthrough and handy for ad-hoc CLI runs.
std::string asset_key(const std::string& id);
void register_asset_ops(AppRegistry& registry);

// Registry with both op families.
AppRegistry default_registry();

// Four orgs (grower, producer, filler, distributor), one user and one admin
// each plus one observer, uniform expiration policies of `delay`.
AppConfig default_winetracker_config(Duration delay = 300000);

}  // namespace evochain::app
