#include "evochain/winetracker.hpp"

#include <cstdint>
#include <set>

#include "evochain/errors.hpp"

namespace evochain::app {

namespace {

std::string require_string(const json& args, const char* field) {
  if (!args.is_object() || !args.contains(field) || !args[field].is_string()) {
    throw Error(ErrorCode::ValidationFailed,
                std::string("missing or invalid '") + field + "'");
  }
  return args[field].get<std::string>();
}

std::int64_t require_count(const json& args, const char* field) {
  if (!args.is_object() || !args.contains(field) ||
      !args[field].is_number_integer()) {
    throw Error(ErrorCode::ValidationFailed,
                std::string("missing or invalid '") + field + "'");
  }
  return args[field].get<std::int64_t>();
}

std::optional<std::int64_t> optional_count(const json& args,
                                           const char* field) {
  if (!args.is_object() || !args.contains(field)) return std::nullopt;
  if (!args[field].is_number_integer()) {
    throw Error(ErrorCode::ValidationFailed,
                std::string("invalid '") + field + "'");
  }
  return args[field].get<std::int64_t>();
}

json require_owned(const AssetView& view, const std::string& key,
                   const Principal& issuer) {
  auto body = view.get(key);
  if (!body) {
    throw Error(ErrorCode::NotFound, "no object '" + key + "'");
  }
  if ((*body).value("owner", std::string{}) != issuer.org) {
    throw Error(ErrorCode::NotOwner,
                "object '" + key + "' is not owned by org '" + issuer.org +
                    "'");
  }
  return std::move(*body);
}

}  // namespace

std::string grapes_key(const std::string& batch_id) {
  return "grapes:" + batch_id;
}

std::string bulk_key(const std::string& bulk_id) { return "bulk:" + bulk_id; }

std::string bottle_key(const std::string& bottle_id) {
  return "bottle:" + bottle_id;
}

std::string asset_key(const std::string& id) { return "asset:" + id; }

void register_winetracker_ops(AppRegistry& registry) {
  registry.add(
      "createGrapes",
      OpSpec{{std::string(kRoleGrower)},
             [](const AssetView& view, const Principal& issuer,
                const json& args) -> std::map<std::string, json> {
               auto batch_id = require_string(args, "batch_id");
               auto quantity = require_count(args, "quantity");
               if (quantity <= 0) {
                 throw Error(ErrorCode::ValidationFailed,
                             "quantity must be positive");
               }
               auto key = grapes_key(batch_id);
               if (view.get(key)) {
                 throw Error(ErrorCode::AlreadyExists,
                             "batch '" + batch_id + "' already exists", key);
               }
               json body = {{"attributes", args.value("attributes", json::object())},
                            {"batch_id", batch_id},
                            {"owner", issuer.org},
                            {"quantity", quantity},
                            {"splits", 0}};
               return {{key, std::move(body)}};
             }});

  registry.add(
      "sellGrapes",
      OpSpec{{std::string(kRoleGrower), std::string(kRoleProducer)},
             [](const AssetView& view, const Principal& issuer,
                const json& args) -> std::map<std::string, json> {
               auto batch_id = require_string(args, "batch_id");
               auto to = require_string(args, "to");
               auto key = grapes_key(batch_id);
               json body = require_owned(view, key, issuer);
               const auto have = body["quantity"].get<std::int64_t>();
               const auto want = optional_count(args, "quantity").value_or(have);
               if (want <= 0) {
                 throw Error(ErrorCode::ValidationFailed,
                             "quantity must be positive");
               }
               if (want > have) {
                 throw Error(ErrorCode::InsufficientQuantity,
                             "batch '" + batch_id + "' holds " +
                                 std::to_string(have) + ", asked for " +
                                 std::to_string(want));
               }
               if (want == have) {
                 body["owner"] = to;
                 return {{key, std::move(body)}};
               }
               // Partial sale splits off a child batch; quantities conserve.
               const auto split_no = body["splits"].get<std::int64_t>() + 1;
               const auto child_id =
                   batch_id + "#" + std::to_string(split_no);
               json child = {{"attributes", body["attributes"]},
                             {"batch_id", child_id},
                             {"owner", to},
                             {"parent_batch", batch_id},
                             {"quantity", want},
                             {"splits", 0}};
               body["quantity"] = have - want;
               body["splits"] = split_no;
               return {{key, std::move(body)},
                       {grapes_key(child_id), std::move(child)}};
             }});

  registry.add(
      "transformGrapes",
      OpSpec{{std::string(kRoleProducer)},
             [](const AssetView& view, const Principal& issuer,
                const json& args) -> std::map<std::string, json> {
               auto batch_id = require_string(args, "batch_id");
               auto bulk_id = require_string(args, "bulk_id");
               auto gkey = grapes_key(batch_id);
               json grapes = require_owned(view, gkey, issuer);
               const auto quantity = grapes["quantity"].get<std::int64_t>();
               if (quantity <= 0) {
                 throw Error(ErrorCode::InsufficientQuantity,
                             "batch '" + batch_id + "' is empty");
               }
               auto bkey = bulk_key(bulk_id);
               if (view.get(bkey)) {
                 throw Error(ErrorCode::AlreadyExists,
                             "bulk '" + bulk_id + "' already exists", bkey);
               }
               const auto volume =
                   optional_count(args, "volume").value_or(quantity);
               if (volume <= 0) {
                 throw Error(ErrorCode::ValidationFailed,
                             "volume must be positive");
               }
               grapes["quantity"] = 0;
               grapes["transformed_into"] = bulk_id;
               json bulk = {{"bottles_filled", 0},
                            {"bulk_id", bulk_id},
                            {"owner", issuer.org},
                            {"source_batch", batch_id},
                            {"volume", volume}};
               return {{gkey, std::move(grapes)}, {bkey, std::move(bulk)}};
             }});

  registry.add(
      "sellBulk",
      OpSpec{{std::string(kRoleProducer)},
             [](const AssetView& view, const Principal& issuer,
                const json& args) -> std::map<std::string, json> {
               auto bulk_id = require_string(args, "bulk_id");
               auto to = require_string(args, "to");
               auto key = bulk_key(bulk_id);
               json body = require_owned(view, key, issuer);
               body["owner"] = to;
               return {{key, std::move(body)}};
             }});

  registry.add(
      "fillBottles",
      OpSpec{{std::string(kRoleFiller)},
             [](const AssetView& view, const Principal& issuer,
                const json& args) -> std::map<std::string, json> {
               auto bulk_id = require_string(args, "bulk_id");
               if (!args.contains("bottle_ids") ||
                   !args["bottle_ids"].is_array() ||
                   args["bottle_ids"].empty()) {
                 throw Error(ErrorCode::ValidationFailed,
                             "missing or invalid 'bottle_ids'");
               }
               auto key = bulk_key(bulk_id);
               json bulk = require_owned(view, key, issuer);
               std::map<std::string, json> writes;
               std::set<std::string> fresh;
               for (const auto& entry : args["bottle_ids"]) {
                 if (!entry.is_string()) {
                   throw Error(ErrorCode::ValidationFailed,
                               "bottle ids must be strings");
                 }
                 auto bottle_id = entry.get<std::string>();
                 if (!fresh.insert(bottle_id).second ||
                     view.get(bottle_key(bottle_id))) {
                   throw Error(ErrorCode::DuplicateBottleId,
                               "bottle '" + bottle_id + "' already exists",
                               bottle_key(bottle_id));
                 }
                 writes[bottle_key(bottle_id)] = {{"bottle_id", bottle_id},
                                                  {"owner", issuer.org},
                                                  {"source_bulk", bulk_id}};
               }
               bulk["bottles_filled"] =
                   bulk["bottles_filled"].get<std::int64_t>() +
                   static_cast<std::int64_t>(fresh.size());
               writes[key] = std::move(bulk);
               return writes;
             }});
}

void register_asset_ops(AppRegistry& registry) {
  registry.add("createAsset",
               OpSpec{{},
                      [](const AssetView& view, const Principal&,
                         const json& args) -> std::map<std::string, json> {
                        auto id = require_string(args, "id");
                        auto key = asset_key(id);
                        if (view.get(key)) {
                          throw Error(ErrorCode::AlreadyExists,
                                      "asset '" + id + "' already exists",
                                      key);
                        }
                        json body = {{"id", id},
                                     {"value", args.value("value", json())}};
                        return {{key, std::move(body)}};
                      }});

  registry.add("updateAsset",
               OpSpec{{},
                      [](const AssetView& view, const Principal&,
                         const json& args) -> std::map<std::string, json> {
                        auto id = require_string(args, "id");
                        auto key = asset_key(id);
                        if (!view.get(key)) {
                          throw Error(ErrorCode::NotFound,
                                      "no asset '" + id + "'");
                        }
                        json body = {{"id", id},
                                     {"value", args.value("value", json())}};
                        return {{key, std::move(body)}};
                      }});
}

AppRegistry default_registry() {
  AppRegistry registry;
  register_winetracker_ops(registry);
  register_asset_ops(registry);
  return registry;
}

AppConfig default_winetracker_config(Duration delay) {
  AppConfig config;
  config.default_delay = delay;
  config.org_roles = {{"grower-coop", std::string(kRoleGrower)},
                      {"vintner", std::string(kRoleProducer)},
                      {"bottler", std::string(kRoleFiller)},
                      {"merchant", std::string(kRoleDistributor)}};
  for (const auto& [org, role] : config.org_roles) {
    config.principals.push_back(Principal{org + "-user", org, Role::User});
    config.principals.push_back(Principal{org + "-admin", org, Role::Admin});
  }
  config.principals.push_back(
      Principal{"auditor", "audit-house", Role::Observer});
  MutationPolicy expiry;
  expiry.kind = PolicyKind::Expiration;
  expiry.delay = delay;
  for (const char* op : {"createGrapes", "sellGrapes", "transformGrapes",
                         "sellBulk", "fillBottles"}) {
    config.op_policies.emplace(op, expiry);
  }
  return config;
}

}  // namespace evochain::app
