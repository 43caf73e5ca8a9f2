#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectra/instrument.hpp"
#include "spectra/minic/ast.hpp"
#include "spectra/minic/vm.hpp"
#include "spectra/spectrum.hpp"

namespace spectra {

// Priorities are unique; higher runs first.
struct ThreadSpec {
  int thread_id = 0;
  int priority = 0;
};

struct HandlerReg {
  std::string name;
  int thread_id = 0;
};

struct Message {
  std::string handler;
  std::vector<std::int64_t> payload;
  std::int64_t enqueue_ms = 0;
};

struct Phase {
  std::string name;
  std::int64_t duration_ms = 0;
};

struct Stimulus {
  std::int64_t at_ms = 0;
  int thread_id = 0;
  std::string handler;
  std::vector<std::int64_t> payload;
};

// A handler that re-posts itself: kicked once when the activation phase
// starts, then re-scheduled repost_period_ms after each completion, with
// nothing ever stopping it.
struct FaultInjection {
  enum class Kind { None, LingeringRepost };
  Kind kind = Kind::None;
  std::string handler;
  std::int64_t repost_period_ms = 0;
  std::string activation_phase;
};

struct Scenario {
  std::vector<ThreadSpec> threads;
  std::vector<HandlerReg> handlers;  // registration order defines handler ids
  std::vector<Phase> phases;
  std::vector<Stimulus> stimuli;
  FaultInjection fault;
  std::int64_t seed = 0;
  std::optional<std::size_t> n_funcs;  // cross-check against the manifest
  std::optional<InstrumentationScope> scope;
  std::optional<std::size_t> capacity;
  std::optional<std::int64_t> bytes_per_second;

  std::int64_t total_duration_ms() const;
  // Start time of the named phase.
  std::optional<std::int64_t> phase_start(const std::string& name) const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text format: "key=value" header entries, then declaration and stimulus
// lines, one per line ("#" comments):
//   thread <id> <priority>
//   handler <name> <thread_id>
//   phase <name> <duration_ms>
//   fault lingering-repost <handler> <period_ms> <activation_phase>
//   at <t_ms> post <thread_id> <handler> [args...]
Scenario parse_scenario(const std::string& text);

// Parses and validates against a program: handlers must exist, stimuli must
// reference declared threads/handlers and lie within the scenario duration.
Scenario load_scenario(const std::string& text, const minic::Program& program);

struct LoadSample {
  std::int64_t second_index = 0;
  std::int64_t busy_ms = 0;
  double load() const { return static_cast<double>(busy_ms) / 1000.0; }
};

enum class SimEventKind {
  Post,       // message enqueued (stimulus, handler post, or fault repost)
  Dispatch,   // handler starts; CPU becomes busy
  Preempt,    // running handler suspended by a higher-priority thread
  Resume,     // suspended handler continues; CPU busy again
  Complete,   // handler finished; CPU idle unless someone else runs
  HandlerError,  // handler faulted; ends its episode like Complete
  Rotate,     // epoch timer fired
  EpochFail,  // current epoch marked failed
  DrainFrame, // one frame handed to the serial channel
};

struct SimEvent {
  std::int64_t t_ms = 0;
  SimEventKind kind = SimEventKind::Post;
  int thread_id = -1;
  std::string handler;
  std::int64_t a = 0;  // kind-specific: epoch seq, counter index, consumed ms
  std::int64_t b = 0;
  std::string detail;
};

std::string render_event_log(const std::vector<SimEvent>& events);

struct RunSummary {
  std::uint64_t rotated_epochs = 0;
  std::uint64_t extended_epochs = 0;
  std::uint64_t dropped_probes = 0;
  std::uint64_t frames_sent = 0;
  std::int64_t total_busy_ms = 0;
  std::int64_t end_of_flush_ms = 0;
  std::uint64_t messages_dispatched = 0;
  std::uint64_t handler_errors = 0;
};

struct RunResult {
  std::vector<LoadSample> load;        // one sample per scenario second
  std::vector<Spectrum> spectra;       // receiver-side, metadata merged
  std::vector<SimEvent> events;
  RunSummary summary;
};

struct SimConfig {
  InstrumentationScope scope = InstrumentationScope::DispatchEntryOnly;
  std::size_t pool_capacity = 8;
  std::int64_t bytes_per_second = 960;
  std::size_t channel_buffer = 64;
  minic::CostModel cost;
  // Recording off: no probes, no pool, no serial traffic. Load must be
  // byte-identical either way.
  bool record = true;
};

// Deterministic virtual-time run of one scenario against one program.
// Handler faults mark the current epoch failed and the loop continues.
RunResult run_simulation(const minic::Program& program, const Scenario& scenario,
                         const Manifest& manifest, const SimConfig& config);

// Busy-interval extraction from the event log: one sample per second of
// [0, duration_ms). The CPU is busy between Dispatch/Resume and
// Preempt/Complete/HandlerError.
std::vector<LoadSample> cpu_load_series(const std::vector<SimEvent>& events,
                                        std::int64_t duration_ms);

// Load CSV: header "second,load", then one row per sample, three decimals.
std::string render_load_csv(const std::vector<LoadSample>& samples);
std::vector<LoadSample> parse_load_csv(const std::string& text);

}  // namespace spectra
