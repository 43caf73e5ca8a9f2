#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectra/instrument.hpp"
#include "spectra/sim.hpp"
#include "spectra/spectrum.hpp"

namespace spectra {

class ShapeMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyWindow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SetRole { Pass, Fail };

// A selected group of spectra playing the pass or fail role in a comparison.
struct SpectraSet {
  std::vector<Spectrum> spectra;
  std::string selector;  // for report headers
  SetRole role = SetRole::Pass;

  std::size_t n_funcs() const;
};

// Ids active in the given spectrum: {id : counts[id] > 0}.
std::set<std::size_t> hit_set(const Spectrum& s);

struct SuspectEntry {
  std::size_t id = 0;
  std::string name;
  std::size_t evidence = 0;  // epochs of the set in which the id is active
};

struct DiagnosisReport {
  std::vector<SuspectEntry> suspects_fail_only;  // evidence desc, id asc
  std::vector<SuspectEntry> suspects_pass_only;
  std::size_t n_pass_epochs = 0;
  std::size_t n_fail_epochs = 0;
  std::string pass_selector;
  std::string fail_selector;
  std::optional<double> accuracy;
};

// Presence/absence comparison of the two windows: fail-only suspects are the
// ids active in at least one fail epoch and no pass epoch; pass-only is the
// mirror image. Names come from the manifest.
DiagnosisReport suspects(const SpectraSet& pass, const SpectraSet& fail,
                         const Manifest& manifest);

// |fail-only suspects intersected with truth| / |fail-only suspects|; empty
// suspect sets have no defined accuracy. Truth ids must exist in the manifest.
std::optional<double> accuracy(const DiagnosisReport& report,
                               const std::set<std::size_t>& truth_ids,
                               const Manifest& manifest);

struct LoadWindow {
  std::int64_t first_second = 0;
  std::int64_t last_second = 0;  // inclusive
};

struct LoadDelta {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double delta_points = 0.0;  // (mean_b - mean_a) * 100
};

LoadDelta load_delta(std::span<const LoadSample> samples, LoadWindow a, LoadWindow b);

// Report text: selector header, SUSPECT lines, PASS-ONLY lines, optional
// accuracy line ("n/a" for an empty suspect set).
std::string render_report(const DiagnosisReport& report, bool with_accuracy);

// Epoch selectors: "a..b" inclusive ranges or comma lists ("3,5,9").
std::vector<std::uint64_t> parse_epoch_selector(const std::string& text);

// Builds a set from the log by selector; selected epochs must all exist.
SpectraSet select_spectra(const std::vector<Spectrum>& log, const std::string& selector,
                          SetRole role);

}  // namespace spectra
