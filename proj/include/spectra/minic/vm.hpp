#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectra/minic/ast.hpp"

namespace spectra::minic {

// Virtual-time costs, in milliseconds. Every executed statement costs
// cost_per_statement (if/while charge once per condition evaluation).
// Builtins cost their map entry, defaulting to 0; __probe is pinned to 0 so
// recording never distorts the load being measured.
struct CostModel {
  std::int64_t cost_per_statement = 1;
  std::map<std::string, std::int64_t> builtin_costs;

  std::int64_t builtin_cost(const std::string& name) const {
    if (name == "__probe") return 0;
    auto it = builtin_costs.find(name);
    return it == builtin_costs.end() ? 0 : it->second;
  }
};

enum class RuntimeFault {
  DivByZero,
  Overflow,
  UnknownFunction,
  UnknownVariable,
  BadArity,
  StackDepthExceeded,
};

const char* to_string(RuntimeFault f);

class RuntimeError : public std::runtime_error {
 public:
  RuntimeError(RuntimeFault fault, SourcePos pos, std::int64_t consumed_ms,
               const std::string& detail);

  RuntimeFault fault;
  SourcePos pos;
  std::int64_t consumed_ms;  // virtual time spent up to the fault
};

// Receives the VM's builtin effects. post_message targets a dispatcher
// handler id; outside the simulator it may simply record or reject.
class VmHost {
 public:
  virtual ~VmHost() = default;
  virtual void on_probe(std::int64_t id) = 0;
  virtual void on_post_message(std::int64_t handler_id, std::int64_t delay_ms) = 0;
  virtual void on_print(std::int64_t value) = 0;
};

struct ExecResult {
  std::int64_t return_value = 0;
  std::int64_t consumed_ms = 0;
  std::vector<std::int64_t> probe_events;
  std::vector<std::int64_t> printed;
};

// One resumable activation of a Mini-C function. Execution advances in whole
// statements; preemption happens only between statements, including the
// statements of nested calls. The Program must outlive the Execution.
class Execution {
 public:
  Execution(const Program& program, const std::string& function,
            std::vector<std::int64_t> args, const CostModel& cost, VmHost& host,
            std::size_t max_stack_depth = kDefaultMaxStackDepth);
  ~Execution();
  Execution(Execution&&) noexcept;
  Execution& operator=(Execution&&) noexcept;

  bool done() const;
  // Executes exactly one statement (plus any zero-cost expression work around
  // it) and returns its cost. Zero-statement completions return 0.
  std::int64_t step_one();
  // Executes whole statements until the next one would exceed the budget or
  // the function returns; returns the consumed time.
  std::int64_t step_budgeted(std::int64_t budget_ms);
  std::int64_t run_to_completion();

  std::int64_t return_value() const;  // valid once done()
  std::int64_t consumed_ms() const;

  static constexpr std::size_t kDefaultMaxStackDepth = 256;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs a function to completion, recording probe events and print output.
ExecResult run_function(const Program& program, const std::string& function,
                        std::vector<std::int64_t> args, const CostModel& cost = {});

// Same, but with an external host for probes/posts/prints.
ExecResult run_function(const Program& program, const std::string& function,
                        std::vector<std::int64_t> args, const CostModel& cost,
                        VmHost& host);

}  // namespace spectra::minic
