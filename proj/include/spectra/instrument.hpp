#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectra/minic/ast.hpp"

namespace spectra {

// Name of the injected counter-bump call. Costs nothing in the VM's cost
// model, so probes never perturb measured load.
inline constexpr const char* kProbeFunction = "__probe";

// Probe granularity. DispatchEntryOnly leaves the program untouched and lets
// the dispatcher bump one counter per handled message; AllCalls rewrites
// every call site in the source.
enum class InstrumentationScope {
  DispatchEntryOnly,
  AllCalls,
};

// Probe-ID-to-function-name map. IDs are dense: entry i has id i.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<std::string> names);

  std::size_t n_funcs() const { return names_.size(); }
  const std::string& name_of(std::size_t id) const { return names_.at(id); }
  std::optional<std::size_t> id_of(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }

  // One line per entry: "<probe_id>\t<function_name>\n", ids ascending.
  std::string to_text() const;
  static Manifest from_text(const std::string& text);

  bool operator==(const Manifest&) const = default;

 private:
  std::vector<std::string> names_;
};

class UnknownHandler : public std::runtime_error {
 public:
  explicit UnknownHandler(const std::string& name)
      : std::runtime_error("unknown handler: " + name), handler(name) {}
  std::string handler;
};

class AlreadyInstrumented : public std::runtime_error {
 public:
  AlreadyInstrumented() : std::runtime_error("program already contains " +
                                             std::string(kProbeFunction) + " calls") {}
};

// True if any call to __probe exists anywhere in the program.
bool has_probes(const minic::Program& program);

// AllCalls: one id per callee name, in order of first textual occurrence
// (pre-order over the tree), __probe excluded. DispatchEntryOnly: ids follow
// the supplied registration order; every name must exist in the program.
Manifest assign_probe_ids(const minic::Program& program, InstrumentationScope scope,
                          const std::vector<std::string>* handlers = nullptr);

// Builds __probe(<id>).
minic::ExprPtr make_probe_call(std::size_t id);

// Wraps a call so the probe fires strictly before it: (__probe(id), call).
// The call must not target __probe itself.
minic::ExprPtr wrap_call(minic::ExprPtr call, std::size_t id);

// Rewrites every call site (AllCalls) or returns the program unchanged
// (DispatchEntryOnly), plus the manifest. Rejects programs that already
// carry probes.
std::pair<minic::Program, Manifest> instrument(
    minic::Program program, InstrumentationScope scope,
    const std::vector<std::string>* handlers = nullptr);

}  // namespace spectra
