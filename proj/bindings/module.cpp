#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <memory>

#include "evochain/bench.hpp"
#include "evochain/canonical.hpp"
#include "evochain/hash.hpp"
#include "evochain/scenarios.hpp"
#include "evochain/view_engine.hpp"
#include "evochain/winetracker.hpp"

namespace py = pybind11;
using namespace evochain;

namespace {

json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return json(nullptr);
  if (py::isinstance<py::bool_>(obj)) return json(obj.cast<bool>());
  if (py::isinstance<py::int_>(obj)) return json(obj.cast<std::int64_t>());
  if (py::isinstance<py::float_>(obj)) return json(obj.cast<double>());
  if (py::isinstance<py::str>(obj)) return json(obj.cast<std::string>());
  if (py::isinstance<py::dict>(obj)) {
    json out = json::object();
    for (const auto& item : obj.cast<py::dict>()) {
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    }
    return out;
  }
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    json out = json::array();
    for (const auto& item : obj.cast<py::sequence>()) {
      out.push_back(py_to_json(item));
    }
    return out;
  }
  throw Error(ErrorCode::ValidationFailed,
              "unsupported python value in transaction args");
}

py::object json_to_py(const json& value) {
  switch (value.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(value.get<bool>());
    case json::value_t::number_integer:
      return py::int_(value.get<std::int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(value.get<std::uint64_t>());
    case json::value_t::number_float:
      return py::float_(value.get<double>());
    case json::value_t::string:
      return py::str(value.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const auto& item : value) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : value.items()) {
        out[py::str(k)] = json_to_py(v);
      }
      return out;
    }
    default:
      return py::none();
  }
}

Principal principal_from_py(const py::dict& d) {
  Principal p;
  p.name = d["name"].cast<std::string>();
  p.org = d["org"].cast<std::string>();
  p.role = role_from_string(d["role"].cast<std::string>());
  return p;
}

py::object view_to_py(const std::optional<ViewObject>& view) {
  if (!view) return py::none();
  py::dict out;
  out["object_key"] = view->object_key;
  out["body"] = json_to_py(view->body);
  out["derived_from"] = view->derived_from.hex;
  out["as_of"] = view->as_of;
  return out;
}

py::dict receipt_to_py(const CommitReceipt& receipt) {
  py::dict out;
  out["tx_id"] = receipt.tx_id.hex;
  out["block_height"] = receipt.block_height;
  out["submission_time"] = receipt.submission_time;
  return out;
}

// One wrapper over both engine variants so python callers switch with a
// string, mirroring the command line.
class PyEngine {
 public:
  PyEngine(const std::string& variant, const py::object& ledger_dir,
           Duration delay) {
    auto config = app::default_winetracker_config(delay);
    auto registry = app::default_registry();
    LedgerStore store;
    if (!ledger_dir.is_none()) {
      const auto dir = ledger_dir.cast<std::string>();
      namespace fs = std::filesystem;
      store = fs::exists(fs::path(dir) / "ledger.jsonl")
                  ? LedgerStore::open(dir)
                  : LedgerStore::create(dir);
    }
    if (bench::variant_from_string(variant) == bench::Variant::EvoChain) {
      auto engine = std::make_unique<EvoEngine>(std::move(store),
                                                std::move(config),
                                                std::move(registry));
      evo_ = engine.get();
      host_ = std::move(engine);
    } else {
      host_ = std::make_unique<VanillaEngine>(std::move(store),
                                              std::move(config),
                                              std::move(registry));
    }
  }

  py::dict issue(const py::dict& principal, const std::string& op,
                 const py::dict& args) {
    auto receipt = host_->issue_transaction(principal_from_py(principal), op,
                                            py_to_json(args));
    return receipt_to_py(receipt);
  }

  py::dict cancel(const py::dict& principal, const std::string& tx_id) {
    auto outcome = require_evo().cancel_transaction(
        principal_from_py(principal), TxId{tx_id});
    py::list canceled;
    for (const auto& id : outcome.cascade_set) canceled.append(id.hex);
    py::dict out;
    out["ct_id"] = outcome.receipt.tx_id.hex;
    out["canceled"] = canceled;
    return out;
  }

  py::dict raise_delay(const py::dict& principal, const std::string& tx_id,
                       Duration new_delay) {
    auto updated = require_evo().raise_delay(principal_from_py(principal),
                                             TxId{tx_id}, new_delay);
    return json_to_py(canonical::record_json(TransactionRecord{updated}))
        .cast<py::dict>();
  }

  py::object get_asset(const std::string& key) {
    return view_to_py(host_->get_asset(key));
  }

  py::list get_transactions(const std::string& key) {
    py::list out;
    for (const auto& tx : host_->get_transactions(key)) {
      out.append(json_to_py(canonical::record_json(TransactionRecord{tx})));
    }
    return out;
  }

  py::dict verify() {
    auto check = host_->store().verify_chain();
    py::dict out;
    out["ok"] = check.ok;
    out["blocks"] = host_->store().height() + 1;
    out["detail"] = check.detail;
    return out;
  }

  Timestamp now() const { return host_->now(); }
  void advance_to(Timestamp t) { host_->advance_to(t); }
  void advance_by(Duration d) { host_->advance_by(d); }
  std::string variant() const { return std::string(host_->variant()); }

 private:
  EvoEngine& require_evo() {
    if (!evo_) {
      throw Error(ErrorCode::ValidationFailed,
                  "this operation requires the evochain variant");
    }
    return *evo_;
  }

  std::unique_ptr<AppHost> host_;
  EvoEngine* evo_{nullptr};
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "permissioned ledger with controlled mutability";

  // Raised instances carry the stable code name and the offending subject
  // (a transaction id or object key) as attributes.
  static py::exception<Error> ledger_error(m, "LedgerError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::reinterpret_borrow<py::object>(ledger_error.ptr());
      py::object inst = type(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      inst.attr("subject") = e.subject();
      PyErr_SetObject(ledger_error.ptr(), inst.ptr());
    }
  });

  py::class_<PyEngine>(m, "Engine")
      .def(py::init<const std::string&, const py::object&, Duration>(),
           py::arg("variant") = "evochain", py::arg("ledger_dir") = py::none(),
           py::arg("delay") = 300000)
      .def("issue", &PyEngine::issue, py::arg("principal"), py::arg("op"),
           py::arg("args"))
      .def("cancel", &PyEngine::cancel, py::arg("principal"),
           py::arg("tx_id"))
      .def("raise_delay", &PyEngine::raise_delay, py::arg("principal"),
           py::arg("tx_id"), py::arg("new_delay"))
      .def("get_asset", &PyEngine::get_asset, py::arg("key"))
      .def("get_transactions", &PyEngine::get_transactions, py::arg("key"))
      .def("verify", &PyEngine::verify)
      .def("now", &PyEngine::now)
      .def("advance_to", &PyEngine::advance_to, py::arg("t"))
      .def("advance_by", &PyEngine::advance_by, py::arg("d"))
      .def_property_readonly("variant", &PyEngine::variant);

  m.def("run_recovery_walkthrough",
        [] { return json_to_py(app::run_recovery_walkthrough().to_json()); });
  m.def("run_threat_scenarios",
        [] { return json_to_py(app::run_threat_scenarios().to_json()); });
  m.def(
      "run_bench",
      [](const std::string& tc, const std::string& variant, int scale,
         std::uint64_t seed, int workers) {
        auto config = bench::make_workload(bench::scenario_from_string(tc),
                                           scale, seed, workers);
        auto report =
            bench::run_workload(config, bench::variant_from_string(variant));
        return json_to_py(bench::report_json(report));
      },
      py::arg("tc"), py::arg("variant") = "evochain", py::arg("scale") = 1000,
      py::arg("seed") = 42, py::arg("workers") = 10);
  m.def("sha256_hex",
        [](const std::string& data) { return sha256_hex(data); });

  m.attr("__version__") = "0.1.0";
}
