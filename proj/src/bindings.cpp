#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spectra/diagnosis.hpp"
#include "spectra/instrument.hpp"
#include "spectra/minic/parser.hpp"
#include "spectra/minic/printer.hpp"
#include "spectra/minic/vm.hpp"
#include "spectra/sim.hpp"
#include "spectra/transport.hpp"

namespace py = pybind11;

namespace {

using spectra::minic::Program;

struct ProgramHandle {
  explicit ProgramHandle(Program p) : program(std::move(p)) {}
  ProgramHandle(const ProgramHandle&) = delete;
  ProgramHandle& operator=(const ProgramHandle&) = delete;
  ProgramHandle(ProgramHandle&&) = default;
  ProgramHandle& operator=(ProgramHandle&&) = default;

  Program program;
};

spectra::InstrumentationScope scope_from_string(const std::string& s) {
  if (s == "all") return spectra::InstrumentationScope::AllCalls;
  if (s == "dispatch") return spectra::InstrumentationScope::DispatchEntryOnly;
  throw py::value_error("scope must be 'all' or 'dispatch'");
}

py::dict run_scenario_text(const std::string& program_text, const std::string& scenario_text,
                           std::size_t capacity, std::int64_t bytes_per_second) {
  Program program = spectra::minic::parse(program_text);
  spectra::Scenario scenario = spectra::load_scenario(scenario_text, program);

  spectra::SimConfig config;
  if (scenario.scope) config.scope = *scenario.scope;
  if (scenario.capacity) config.pool_capacity = *scenario.capacity;
  if (scenario.bytes_per_second) config.bytes_per_second = *scenario.bytes_per_second;
  if (capacity != 0) config.pool_capacity = capacity;
  if (bytes_per_second != 0) config.bytes_per_second = bytes_per_second;

  spectra::Manifest manifest;
  if (config.scope == spectra::InstrumentationScope::DispatchEntryOnly) {
    std::vector<std::string> names;
    for (const auto& h : scenario.handlers) names.push_back(h.name);
    manifest = spectra::Manifest(std::move(names));
  } else {
    manifest = spectra::assign_probe_ids(program, spectra::InstrumentationScope::AllCalls);
  }

  auto result = spectra::run_simulation(program, scenario, manifest, config);

  py::list spectra_out;
  for (const auto& s : result.spectra) {
    py::dict d;
    d["epoch"] = s.epoch_seq;
    d["t"] = s.start_ms;
    d["label"] = spectra::to_string(s.label);
    d["counts"] = s.counts;
    spectra_out.append(d);
  }
  py::list load_out;
  for (const auto& s : result.load) load_out.append(s.load());

  py::dict out;
  out["spectra"] = spectra_out;
  out["load"] = load_out;
  out["spectra_log"] = spectra::render_spectra_log(result.spectra);
  out["load_csv"] = spectra::render_load_csv(result.load);
  out["event_log"] = spectra::render_event_log(result.events);
  out["manifest"] = manifest.names();
  py::dict summary;
  summary["rotated_epochs"] = result.summary.rotated_epochs;
  summary["extended_epochs"] = result.summary.extended_epochs;
  summary["dropped_probes"] = result.summary.dropped_probes;
  summary["frames_sent"] = result.summary.frames_sent;
  summary["total_busy_ms"] = result.summary.total_busy_ms;
  summary["messages_dispatched"] = result.summary.messages_dispatched;
  summary["handler_errors"] = result.summary.handler_errors;
  out["summary"] = summary;
  return out;
}

py::dict diagnose_logs(const std::string& spectra_log, const std::vector<std::string>& names,
                       const std::string& pass_selector, const std::string& fail_selector,
                       const std::vector<std::string>& truth) {
  auto log = spectra::parse_spectra_log(spectra_log);
  spectra::Manifest manifest{std::vector<std::string>(names)};
  auto pass = spectra::select_spectra(log, pass_selector, spectra::SetRole::Pass);
  auto fail = spectra::select_spectra(log, fail_selector, spectra::SetRole::Fail);
  auto report = spectra::suspects(pass, fail, manifest);

  bool with_accuracy = !truth.empty();
  if (with_accuracy) {
    std::set<std::size_t> truth_ids;
    for (const auto& name : truth) {
      auto id = manifest.id_of(name);
      if (!id) throw py::value_error("truth name not in manifest: " + name);
      truth_ids.insert(*id);
    }
    report.accuracy = spectra::accuracy(report, truth_ids, manifest);
  }

  auto entries = [](const std::vector<spectra::SuspectEntry>& v) {
    py::list out;
    for (const auto& e : v) {
      py::dict d;
      d["id"] = e.id;
      d["name"] = e.name;
      d["evidence"] = e.evidence;
      out.append(d);
    }
    return out;
  };

  py::dict out;
  out["fail_only"] = entries(report.suspects_fail_only);
  out["pass_only"] = entries(report.suspects_pass_only);
  if (report.accuracy) {
    out["accuracy"] = *report.accuracy;
  } else {
    out["accuracy"] = py::none();
  }
  out["report"] = spectra::render_report(report, with_accuracy);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Program-spectra laboratory core: Mini-C instrumentation, simulated "
            "collection over a serial link, and pass/fail spectra diagnosis.";

  py::class_<ProgramHandle>(m, "Program")
      .def("__repr__",
           [](const ProgramHandle& p) {
             return "<Program with " + std::to_string(p.program.functions.size()) +
                    " function(s)>";
           })
      .def_property_readonly("function_names", [](const ProgramHandle& p) {
        std::vector<std::string> names;
        for (const auto& f : p.program.functions) names.push_back(f.name);
        return names;
      });

  m.def("parse", [](const std::string& text) {
    return ProgramHandle(spectra::minic::parse(text));
  }, py::arg("text"), "Parse Mini-C source into a Program.");

  m.def("print_program", [](const ProgramHandle& p) {
    return spectra::minic::print(p.program);
  }, py::arg("program"), "Render a Program back to source text.");

  m.def("instrument", [](const ProgramHandle& p, const std::string& scope,
                         std::optional<std::vector<std::string>> handlers) {
    auto sc = scope_from_string(scope);
    const std::vector<std::string>* h = handlers ? &*handlers : nullptr;
    auto [instrumented, manifest] = spectra::instrument(clone(p.program), sc, h);
    return py::make_tuple(ProgramHandle(std::move(instrumented)), manifest.names());
  }, py::arg("program"), py::arg("scope") = "all", py::arg("handlers") = py::none(),
     "Insert probes; returns (program, manifest names).");

  m.def("run_function", [](const ProgramHandle& p, const std::string& name,
                           const std::vector<std::int64_t>& args) {
    auto r = spectra::minic::run_function(p.program, name, args);
    py::dict out;
    out["return_value"] = r.return_value;
    out["consumed_ms"] = r.consumed_ms;
    out["probe_events"] = r.probe_events;
    out["printed"] = r.printed;
    return out;
  }, py::arg("program"), py::arg("name") = "main",
     py::arg("args") = std::vector<std::int64_t>{},
     "Run one function to completion under the default cost model.");

  m.def("encode_frame", [](std::uint16_t epoch, std::uint16_t index, std::uint8_t count) {
    auto bytes = spectra::encode_frame(spectra::Frame{epoch, index, count});
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }, py::arg("epoch"), py::arg("index"), py::arg("count"));

  m.def("decode_frame", [](const py::bytes& data) {
    std::string s = data;
    auto f = spectra::decode_frame(
        std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    py::dict out;
    out["epoch"] = f.epoch_seq;
    out["index"] = f.counter_index;
    out["count"] = f.count;
    out["is_end"] = f.is_end();
    return out;
  }, py::arg("data"));

  m.def("run_scenario", &run_scenario_text, py::arg("program_text"),
        py::arg("scenario_text"), py::arg("capacity") = 0,
        py::arg("bytes_per_second") = 0,
        "Run a scenario end to end; returns spectra, load, logs and summary.");

  m.def("diagnose", &diagnose_logs, py::arg("spectra_log"), py::arg("manifest_names"),
        py::arg("pass_selector"), py::arg("fail_selector"),
        py::arg("truth") = std::vector<std::string>{},
        "Compare pass/fail spectra windows from a rendered spectra log.");

  m.attr("COUNT_SATURATION") = spectra::kCountSaturation;
  m.attr("FRAME_SIZE") = spectra::kFrameSize;
}
