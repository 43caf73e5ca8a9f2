// spectra-lab: instrument Mini-C sources, run instrumented programs inside
// the dispatch simulator, and compare the collected spectra offline.
//
// Exit codes: 0 success, 2 usage, 3 parse error, 4 I/O error,
// 5 re-instrumentation refused, 6 scenario validation, 7 empty selector.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spectra/diagnosis.hpp"
#include "spectra/instrument.hpp"
#include "spectra/minic/parser.hpp"
#include "spectra/minic/printer.hpp"
#include "spectra/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitIo = 4;
constexpr int kExitReinstrument = 5;
constexpr int kExitScenario = 6;
constexpr int kExitEmptySelector = 7;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << data;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::string> read_name_list(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') names.push_back(line);
  }
  return names;
}

spectra::InstrumentationScope parse_scope(const std::string& s) {
  if (s == "all") return spectra::InstrumentationScope::AllCalls;
  if (s == "dispatch") return spectra::InstrumentationScope::DispatchEntryOnly;
  throw CLI::ValidationError("--scope", "must be 'all' or 'dispatch'");
}

int cmd_instrument(const std::string& in_path, const std::string& out_path,
                   const std::string& manifest_path, const std::string& scope_name,
                   const std::string& handlers_path) {
  spectra::InstrumentationScope scope = parse_scope(scope_name);
  std::vector<std::string> handlers;
  if (scope == spectra::InstrumentationScope::DispatchEntryOnly) {
    if (handlers_path.empty()) {
      std::cerr << "spectra-lab: --scope dispatch requires --handlers <file>\n";
      return kExitUsage;
    }
    handlers = read_name_list(handlers_path);
  }

  spectra::minic::Program program;
  try {
    program = spectra::minic::parse(read_file(in_path));
  } catch (const spectra::minic::ParseError& e) {
    std::cerr << in_path << ": " << e.what() << "\n";
    return kExitParse;
  }

  try {
    auto [instrumented, manifest] =
        spectra::instrument(std::move(program), scope,
                            handlers.empty() ? nullptr : &handlers);
    write_file(out_path, spectra::minic::print(instrumented));
    write_file(manifest_path, manifest.to_text());
    std::cout << "instrumented " << in_path << ": " << manifest.n_funcs()
              << " probe ids -> " << manifest_path << "\n";
    return kExitOk;
  } catch (const spectra::AlreadyInstrumented& e) {
    std::cerr << in_path << ": " << e.what() << "\n";
    return kExitReinstrument;
  } catch (const spectra::UnknownHandler& e) {
    std::cerr << in_path << ": " << e.what() << "\n";
    return kExitScenario;
  }
}

int cmd_run(const std::string& scenario_path, const std::string& program_path,
            const std::string& manifest_path, const std::string& spectra_path,
            const std::string& load_path, const std::string& events_path,
            std::optional<std::int64_t> seed, std::optional<std::int64_t> capacity,
            std::optional<std::int64_t> baud) {
  spectra::minic::Program program;
  try {
    program = spectra::minic::parse(read_file(program_path));
  } catch (const spectra::minic::ParseError& e) {
    std::cerr << program_path << ": " << e.what() << "\n";
    return kExitParse;
  }

  spectra::Manifest manifest;
  try {
    manifest = spectra::Manifest::from_text(read_file(manifest_path));
  } catch (const std::exception& e) {
    std::cerr << manifest_path << ": " << e.what() << "\n";
    return kExitScenario;
  }

  try {
    spectra::Scenario scenario = spectra::load_scenario(read_file(scenario_path), program);
    if (seed) scenario.seed = *seed;

    spectra::SimConfig config;
    if (scenario.scope) config.scope = *scenario.scope;
    if (scenario.capacity) config.pool_capacity = *scenario.capacity;
    if (scenario.bytes_per_second) config.bytes_per_second = *scenario.bytes_per_second;
    if (capacity) config.pool_capacity = static_cast<std::size_t>(*capacity);
    if (baud) config.bytes_per_second = *baud;

    if (config.scope == spectra::InstrumentationScope::AllCalls) {
      auto expected = spectra::assign_probe_ids(program, config.scope);
      if (!(expected == manifest)) {
        std::cerr << "manifest does not match the program's call sites; re-instrument\n";
        return kExitScenario;
      }
    }

    spectra::RunResult result =
        spectra::run_simulation(program, scenario, manifest, config);

    write_file(spectra_path, spectra::render_spectra_log(result.spectra));
    write_file(load_path, spectra::render_load_csv(result.load));
    if (!events_path.empty()) {
      write_file(events_path, spectra::render_event_log(result.events));
    }

    const auto& s = result.summary;
    std::printf("run: %llu epochs rotated, %llu extended, %llu dropped probes\n",
                static_cast<unsigned long long>(s.rotated_epochs),
                static_cast<unsigned long long>(s.extended_epochs),
                static_cast<unsigned long long>(s.dropped_probes));
    std::printf("run: %llu messages dispatched, %llu handler errors, busy %lld ms\n",
                static_cast<unsigned long long>(s.messages_dispatched),
                static_cast<unsigned long long>(s.handler_errors),
                static_cast<long long>(s.total_busy_ms));
    std::printf("run: %llu frames sent, flush finished at %lld ms\n",
                static_cast<unsigned long long>(s.frames_sent),
                static_cast<long long>(s.end_of_flush_ms));
    return kExitOk;
  } catch (const spectra::ScenarioError& e) {
    std::cerr << scenario_path << ": " << e.what() << "\n";
    return kExitScenario;
  }
}

int cmd_diagnose(const std::string& spectra_path, const std::string& manifest_path,
                 const std::string& pass_sel, const std::string& fail_sel,
                 const std::string& truth_path, const std::string& out_path) {
  auto log = spectra::parse_spectra_log(read_file(spectra_path));
  auto manifest = spectra::Manifest::from_text(read_file(manifest_path));

  spectra::SpectraSet pass_set;
  spectra::SpectraSet fail_set;
  try {
    pass_set = spectra::select_spectra(log, pass_sel, spectra::SetRole::Pass);
    fail_set = spectra::select_spectra(log, fail_sel, spectra::SetRole::Fail);
    if (pass_set.spectra.empty() || fail_set.spectra.empty()) {
      throw std::out_of_range("selector matched no epochs");
    }
  } catch (const std::exception& e) {
    std::cerr << "selector: " << e.what() << "\n";
    return kExitEmptySelector;
  }

  auto report = spectra::suspects(pass_set, fail_set, manifest);

  bool with_accuracy = !truth_path.empty();
  if (with_accuracy) {
    std::set<std::size_t> truth_ids;
    for (const auto& name : read_name_list(truth_path)) {
      auto id = manifest.id_of(name);
      if (!id) {
        std::cerr << truth_path << ": '" << name << "' not in manifest\n";
        return kExitScenario;
      }
      truth_ids.insert(*id);
    }
    report.accuracy = spectra::accuracy(report, truth_ids, manifest);
  }

  std::string text = spectra::render_report(report, with_accuracy);
  write_file(out_path, text);
  std::cout << text;
  return kExitOk;
}

int cmd_report(const std::string& load_path, const std::string& out_path,
               const std::vector<std::string>& window_args) {
  auto samples = spectra::parse_load_csv(read_file(load_path));
  if (samples.empty()) {
    std::cerr << load_path << ": no load samples\n";
    return kExitIo;
  }

  struct NamedWindow {
    std::string name;
    spectra::LoadWindow w;
  };
  std::vector<NamedWindow> windows;
  for (const auto& arg : window_args) {
    auto eq = arg.find('=');
    auto dots = arg.find("..");
    if (eq == std::string::npos || dots == std::string::npos || dots < eq) {
      std::cerr << "bad --window '" << arg << "', expected name=a..b\n";
      return kExitUsage;
    }
    NamedWindow nw;
    nw.name = arg.substr(0, eq);
    nw.w.first_second = std::stoll(arg.substr(eq + 1, dots - eq - 1));
    nw.w.last_second = std::stoll(arg.substr(dots + 2));
    windows.push_back(std::move(nw));
  }

  std::string out = "# second load\n";
  char buf[64];
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%lld %.3f\n", static_cast<long long>(s.second_index),
                  s.load());
    out += buf;
  }

  std::string summary;
  try {
    for (const auto& nw : windows) {
      auto d = spectra::load_delta(samples, nw.w, nw.w);
      std::snprintf(buf, sizeof buf, "# %s mean=%.4f\n", nw.name.c_str(), d.mean_a);
      summary += buf;
    }
    if (windows.size() >= 2) {
      auto d = spectra::load_delta(samples, windows[0].w, windows[1].w);
      std::snprintf(buf, sizeof buf, "# delta %s-%s = %+.1f points\n",
                    windows[1].name.c_str(), windows[0].name.c_str(), d.delta_points);
      summary += buf;
    }
  } catch (const spectra::EmptyWindow& e) {
    std::cerr << "window: " << e.what() << "\n";
    return kExitUsage;
  }
  out += summary;

  if (out_path.empty()) {
    std::cout << out;
  } else {
    write_file(out_path, out);
    std::cout << summary;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"program-spectra laboratory: instrumentation, simulated collection, diagnosis"};
  app.require_subcommand(1);

  // instrument
  std::string in_path, out_path, manifest_path, handlers_path;
  std::string scope_name = "all";
  auto* instrument = app.add_subcommand("instrument", "rewrite a Mini-C source with probes");
  instrument->add_option("input", in_path, "source file")->required();
  instrument->add_option("-o,--output", out_path, "instrumented output")->required();
  instrument->add_option("--manifest", manifest_path, "manifest output")->required();
  instrument->add_option("--scope", scope_name, "all|dispatch");
  instrument->add_option("--handlers", handlers_path,
                         "handler registration order (dispatch scope)");

  // run
  std::string scenario_path, program_path, run_manifest, spectra_path, load_path, events_path;
  std::optional<std::int64_t> seed, capacity, baud;
  auto* run = app.add_subcommand("run", "execute a scenario in the dispatch simulator");
  run->add_option("--scenario", scenario_path)->required();
  run->add_option("--program", program_path)->required();
  run->add_option("--manifest", run_manifest)->required();
  run->add_option("--spectra", spectra_path, "spectra log output")->required();
  run->add_option("--load", load_path, "load CSV output")->required();
  run->add_option("--events", events_path, "event log output");
  run->add_option("--seed", seed);
  run->add_option("--capacity", capacity, "spectrum pool buffers");
  run->add_option("--baud", baud, "channel bytes per second");

  // diagnose
  std::string d_spectra, d_manifest, d_pass, d_fail, d_truth, d_out;
  auto* diagnose = app.add_subcommand("diagnose", "compare pass/fail spectra windows");
  diagnose->add_option("--spectra", d_spectra)->required();
  diagnose->add_option("--manifest", d_manifest)->required();
  diagnose->add_option("--pass", d_pass, "epoch selector (a..b or list)")->required();
  diagnose->add_option("--fail", d_fail, "epoch selector (a..b or list)")->required();
  diagnose->add_option("--truth", d_truth, "known fault names, one per line");
  diagnose->add_option("-o,--output", d_out, "report output")->required();

  // report
  std::string r_load, r_out;
  std::vector<std::string> r_windows;
  auto* report = app.add_subcommand("report", "load CSV to plot-ready table with window means");
  report->add_option("--load", r_load)->required();
  report->add_option("-o,--output", r_out);
  report->add_option("--window", r_windows, "name=a..b (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*instrument) {
      return cmd_instrument(in_path, out_path, manifest_path, scope_name, handlers_path);
    }
    if (*run) {
      return cmd_run(scenario_path, program_path, run_manifest, spectra_path, load_path,
                     events_path, seed, capacity, baud);
    }
    if (*diagnose) {
      return cmd_diagnose(d_spectra, d_manifest, d_pass, d_fail, d_truth, d_out);
    }
    if (*report) {
      return cmd_report(r_load, r_out, r_windows);
    }
  } catch (const IoError& e) {
    std::cerr << "spectra-lab: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "spectra-lab: " << e.what() << "\n";
    return kExitScenario;
  }
  return kExitUsage;
}
